use crate::error::{Error, Result};

/// Channel widths of every subnetwork.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NetworkConfig {
    /// BlockNet RRDB width.
    pub block_width: usize,
    pub block_growth: usize,
    /// FrequencyNet RRDB width; a multiple of 64 (one group per frequency).
    pub freq_width: usize,
    /// FrequencyNet dense growth; a multiple of 64.
    pub freq_growth: usize,
    pub fusion_width: usize,
    /// Width of each branch of the color network (the merged RRDB is twice this).
    pub color_width: usize,
    pub color_growth: usize,
    /// Hidden widths of the CFM kernel generators.
    pub cfm_hidden: [usize; 2],
}

impl Default for NetworkConfig {
    fn default() -> Self {
        Self {
            block_width: 256,
            block_growth: 32,
            freq_width: 256,
            freq_growth: 64,
            fusion_width: 32,
            color_width: 256,
            color_growth: 32,
            cfm_hidden: [16, 32],
        }
    }
}

impl NetworkConfig {
    /// Desk-scale widths for tests and smoke training.
    pub fn toy() -> Self {
        Self {
            block_width: 16,
            block_growth: 8,
            freq_width: 64,
            freq_growth: 64,
            fusion_width: 8,
            color_width: 16,
            color_growth: 8,
            cfm_hidden: [16, 32],
        }
    }

    pub fn validate(&self) -> Result<()> {
        let named = [
            ("block_width", self.block_width),
            ("block_growth", self.block_growth),
            ("freq_width", self.freq_width),
            ("freq_growth", self.freq_growth),
            ("fusion_width", self.fusion_width),
            ("color_width", self.color_width),
            ("color_growth", self.color_growth),
            ("cfm_hidden[0]", self.cfm_hidden[0]),
            ("cfm_hidden[1]", self.cfm_hidden[1]),
        ];
        if let Some((name, _)) = named.iter().find(|(_, v)| *v == 0) {
            return Err(Error::Config(format!("{name} must be positive")));
        }
        if self.freq_width % 64 != 0 || self.freq_growth % 64 != 0 {
            return Err(Error::Config(format!(
                "frequency path widths must be multiples of 64, got width {} growth {}",
                self.freq_width, self.freq_growth
            )));
        }
        Ok(())
    }

    pub(crate) fn fields(&self) -> [usize; 9] {
        [
            self.block_width,
            self.block_growth,
            self.freq_width,
            self.freq_growth,
            self.fusion_width,
            self.color_width,
            self.color_growth,
            self.cfm_hidden[0],
            self.cfm_hidden[1],
        ]
    }

    pub(crate) fn from_fields(f: [usize; 9]) -> Self {
        Self {
            block_width: f[0],
            block_growth: f[1],
            freq_width: f[2],
            freq_growth: f[3],
            fusion_width: f[4],
            color_width: f[5],
            color_growth: f[6],
            cfm_hidden: [f[7], f[8]],
        }
    }
}
