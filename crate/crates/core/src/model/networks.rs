//! The subnetworks and their composition. All forwards work on normalized
//! coefficients laid out spatially as `(N, 1, H, W)` tensors.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::config::NetworkConfig;
use super::layers::{Cfm, Conv, ParamSpec, Prelu, Rrdb, Table};
use crate::error::{Error, Result};
use crate::nn::{concat_channels, depth_to_space8, space_to_depth8, Bindings, ConvSpec, ParamStore, Tensor};

fn check_blocks(x: &Tensor, what: &str) -> Result<()> {
    let [_, c, h, w] = x.shape();
    if c != 1 || h % 8 != 0 || w % 8 != 0 || h == 0 || w == 0 {
        return Err(Error::domain(format!(
            "{what} expects (N, 1, H, W) with H, W positive multiples of 8, got {:?}",
            x.shape()
        )));
    }
    Ok(())
}

/// CFM block generator, RRDB, transposed CFM block decoder.
#[derive(Debug, Clone)]
pub struct BlockNet {
    head: Cfm,
    body: Rrdb,
    tail: Cfm,
}

impl BlockNet {
    pub fn new(name: &str, cfg: &NetworkConfig) -> Self {
        Self {
            head: Cfm::new(format!("{name}.head"), 1, cfg.block_width, false, cfg.cfm_hidden, false),
            body: Rrdb::new(&format!("{name}.body"), cfg.block_width, cfg.block_growth, 1),
            tail: Cfm::new(format!("{name}.tail"), cfg.block_width, 1, true, cfg.cfm_hidden, false),
        }
    }

    fn declare(&self, t: &mut Table) {
        self.head.declare(t);
        self.body.declare(t);
        self.tail.declare(t);
    }

    pub fn forward(&self, b: &Bindings, x: &Tensor, qnorm: &Tensor) -> Result<Tensor> {
        check_blocks(x, "BlockNet")?;
        let h = self.head.forward(b, x, qnorm)?;
        let h = self.body.forward(b, &h)?;
        self.tail.forward(b, &h, qnorm)
    }
}

/// Frequencies to channels, 3×3 conv, grouped RRDB (one group per
/// frequency), 3×3 conv, channels back to blocks.
#[derive(Debug, Clone)]
pub struct FrequencyNet {
    input: Conv,
    body: Rrdb,
    output: Conv,
}

impl FrequencyNet {
    pub fn new(name: &str, cfg: &NetworkConfig) -> Self {
        let w = cfg.freq_width;
        Self {
            input: Conv::new(format!("{name}.input"), ConvSpec::new(64, w, 3).padding(1), 1.0),
            body: Rrdb::new(&format!("{name}.body"), w, cfg.freq_growth, 64),
            output: Conv::new(format!("{name}.output"), ConvSpec::new(w, 64, 3).padding(1), 1.0),
        }
    }

    fn declare(&self, t: &mut Table) {
        self.input.declare(t);
        self.body.declare(t);
        self.output.declare(t);
    }

    pub fn forward(&self, b: &Bindings, x: &Tensor) -> Result<Tensor> {
        check_blocks(x, "FrequencyNet")?;
        let h = self.input.forward(b, &space_to_depth8(x)?)?;
        let h = self.body.forward(b, &h)?;
        depth_to_space8(&self.output.forward(b, &h)?)
    }
}

/// Three 3×3 convolutions over the stacked subnetwork outputs; the last one
/// starts at zero.
#[derive(Debug, Clone)]
pub struct Fusion {
    convs: [Conv; 3],
    acts: [Prelu; 2],
}

impl Fusion {
    pub fn new(name: &str, cfg: &NetworkConfig) -> Self {
        let f = cfg.fusion_width;
        let c = |i: usize, cin, cout, scale| Conv::new(format!("{name}.conv{i}"), ConvSpec::new(cin, cout, 3).padding(1), scale);
        Self {
            convs: [c(0, 3, f, 1.0), c(1, f, f, 1.0), c(2, f, 1, 0.0)],
            acts: [Prelu::new(format!("{name}.act0"), f), Prelu::new(format!("{name}.act1"), f)],
        }
    }

    fn declare(&self, t: &mut Table) {
        self.convs[0].declare(t);
        self.acts[0].declare(t);
        self.convs[1].declare(t);
        self.acts[1].declare(t);
        self.convs[2].declare(t);
    }

    pub fn forward(&self, b: &Bindings, r1: &Tensor, r2: &Tensor, r3: &Tensor) -> Result<Tensor> {
        if r1.shape() != r2.shape() || r1.shape() != r3.shape() {
            return Err(Error::domain(format!(
                "fusion inputs differ in shape: {:?}, {:?}, {:?}",
                r1.shape(),
                r2.shape(),
                r3.shape()
            )));
        }
        let h = concat_channels(&[r1, r2, r3])?;
        let h = self.acts[0].forward(b, &self.convs[0].forward(b, &h)?)?;
        let h = self.acts[1].forward(b, &self.convs[1].forward(b, &h)?)?;
        self.convs[2].forward(b, &h)
    }
}

/// Luma restoration: BlockNet, FrequencyNet, BlockNet in sequence, their
/// outputs fused into a residual on the input.
#[derive(Debug, Clone)]
pub struct YNet {
    pub pre: BlockNet,
    pub freq: FrequencyNet,
    pub post: BlockNet,
    pub fusion: Fusion,
}

/// Intermediate outputs of the luma network.
pub struct YOutputs {
    pub r1: Tensor,
    pub r2: Tensor,
    pub r3: Tensor,
    pub restored: Tensor,
}

impl YNet {
    pub fn new(cfg: &NetworkConfig) -> Self {
        Self {
            pre: BlockNet::new("blocknet_pre", cfg),
            freq: FrequencyNet::new("frequencynet", cfg),
            post: BlockNet::new("blocknet_post", cfg),
            fusion: Fusion::new("fusion", cfg),
        }
    }

    pub fn forward_all(&self, b: &Bindings, x: &Tensor, qnorm: &Tensor) -> Result<YOutputs> {
        let r1 = self.pre.forward(b, x, qnorm)?;
        let r2 = self.freq.forward(b, &r1)?;
        let r3 = self.post.forward(b, &r2, qnorm)?;
        let restored = x.add(&self.fusion.forward(b, &r1, &r2, &r3)?)?;
        Ok(YOutputs { r1, r2, r3, restored })
    }

    pub fn forward(&self, b: &Bindings, x: &Tensor, qnorm: &Tensor) -> Result<Tensor> {
        Ok(self.forward_all(b, x, qnorm)?.restored)
    }
}

/// Chroma restoration guided by restored luma. Produces the residual at luma
/// resolution; the caller adds the upsampled input.
#[derive(Debug, Clone)]
pub struct ColorNet {
    chroma_head: Cfm,
    chroma_body: Rrdb,
    upsample: Conv,
    luma_head: Cfm,
    body: Rrdb,
    tail: Cfm,
}

impl ColorNet {
    pub fn new(cfg: &NetworkConfig) -> Self {
        let (w, g, h) = (cfg.color_width, cfg.color_growth, cfg.cfm_hidden);
        Self {
            chroma_head: Cfm::new("color_net.chroma_head", 1, w, false, h, false),
            chroma_body: Rrdb::new("color_net.chroma_body", w, g, 1),
            upsample: Conv::new("color_net.upsample", ConvSpec::new(w, w, 4).stride(2).padding(1).transposed(), 1.0),
            luma_head: Cfm::new("color_net.luma_head", 1, w, false, h, false),
            body: Rrdb::new("color_net.body", 2 * w, g, 1),
            tail: Cfm::new("color_net.tail", 2 * w, 1, true, h, true),
        }
    }

    fn declare(&self, t: &mut Table) {
        self.chroma_head.declare(t);
        self.chroma_body.declare(t);
        self.upsample.declare(t);
        self.luma_head.declare(t);
        self.body.declare(t);
        self.tail.declare(t);
    }

    /// `chroma` is `(N, 1, h, w)`, `luma` is `(N, 1, 2h, 2w)`; returns the
    /// residual `(N, 1, 2h, 2w)`.
    pub fn forward(&self, b: &Bindings, chroma: &Tensor, luma: &Tensor, q_chroma: &Tensor, q_luma: &Tensor) -> Result<Tensor> {
        check_blocks(chroma, "color network chroma input")?;
        check_blocks(luma, "color network luma input")?;
        let [n, _, h, w] = chroma.shape();
        let [ln, _, lh, lw] = luma.shape();
        if ln != n || lh != 2 * h || lw != 2 * w {
            return Err(Error::domain(format!(
                "luma {:?} must be twice the chroma {:?} spatially",
                luma.shape(),
                chroma.shape()
            )));
        }
        let c = self.chroma_head.forward(b, chroma, q_chroma)?;
        let c = self.chroma_body.forward(b, &c)?;
        let c = self.upsample.forward(b, &c)?;
        let y = self.luma_head.forward(b, luma, q_luma)?;
        let h = self.body.forward(b, &concat_channels(&[&c, &y])?)?;
        self.tail.forward(b, &h, q_chroma)
    }
}

/// The whole model: luma network plus color network.
#[derive(Debug, Clone)]
pub struct Qgac {
    pub config: NetworkConfig,
    pub y: YNet,
    pub color: ColorNet,
}

/// Top-level parameter groups, in checkpoint order.
pub const SUBNETWORKS: [&str; 5] = ["blocknet_pre", "frequencynet", "blocknet_post", "fusion", "color_net"];

impl Qgac {
    pub fn new(config: NetworkConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            y: YNet::new(&config),
            color: ColorNet::new(&config),
            config,
        })
    }

    /// Every parameter with its shape and initializer.
    pub fn architecture(&self) -> Vec<ParamSpec> {
        let mut t = Table::new();
        self.y.pre.declare(&mut t);
        self.y.freq.declare(&mut t);
        self.y.post.declare(&mut t);
        self.y.fusion.declare(&mut t);
        self.color.declare(&mut t);
        t
    }

    /// Freshly initialized parameters; the fusion output layer and the color
    /// tail start at zero so the untrained model is the identity.
    pub fn init_params(&self, seed: u64) -> Result<ParamStore> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut store = ParamStore::new();
        for spec in self.architecture() {
            let n = spec.shape.iter().product();
            store.insert(spec.name.clone(), spec.shape, spec.init.sample(&mut rng, n))?;
        }
        Ok(store)
    }
}

/// The subnetwork a parameter name belongs to.
pub fn subnetwork_of(name: &str) -> &str {
    name.split('.').next().unwrap_or(name)
}

/// True for parameters of the luma network.
pub fn is_luma_param(name: &str) -> bool {
    subnetwork_of(name) != "color_net"
}
