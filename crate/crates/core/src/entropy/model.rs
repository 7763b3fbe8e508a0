use crate::error::{Error, Result};

/// Largest cumulative total a model may present to the coder.
pub const MAX_TOTAL: u32 = 1 << 16;

/// Adaptive tables halve their counts once the total reaches this value.
pub const RESCALE_AT: u32 = 1 << 15;

/// Largest alphabet the adaptive order-0 model accepts.
pub const MAX_ADAPTIVE_ALPHABET: usize = 1 << 12;

/// Largest alphabet the left-neighbor model accepts; it keeps one table per
/// previous symbol.
pub const MAX_NEIGHBOR_ALPHABET: usize = 1 << 8;

/// Conditional distribution over a `K`-symbol alphabet.
///
/// The model sees symbols only through `update`, in coding order, so the
/// distribution it presents for position `t` depends on positions `< t`
/// alone. Encoder and decoder must start from identically built models.
pub trait ProbabilityModel {
    fn alphabet_size(&self) -> usize;

    /// `K + 1` cumulative frequencies: `cum[0] = 0`, `cum[K] = total`,
    /// every symbol with frequency at least 1, total at most [`MAX_TOTAL`].
    fn cumulative(&self) -> &[u32];

    fn update(&mut self, symbol: usize);
}

fn cumulate(freqs: &[u32]) -> Vec<u32> {
    let mut cum = Vec::with_capacity(freqs.len() + 1);
    let mut acc = 0;
    cum.push(0);
    for &f in freqs {
        acc += f;
        cum.push(acc);
    }
    cum
}

/// Fixed frequency table.
#[derive(Debug, Clone)]
pub struct StaticModel {
    cum: Vec<u32>,
}

impl StaticModel {
    pub fn new(freqs: &[u32]) -> Result<StaticModel> {
        if freqs.is_empty() {
            return Err(Error::InvalidModel("empty alphabet".into()));
        }
        if freqs.contains(&0) {
            return Err(Error::InvalidModel("zero frequency".into()));
        }
        let total: u64 = freqs.iter().map(|&f| f as u64).sum();
        if total > MAX_TOTAL as u64 {
            return Err(Error::InvalidModel(format!("total {total} exceeds {MAX_TOTAL}")));
        }
        Ok(StaticModel { cum: cumulate(freqs) })
    }

    pub fn uniform(alphabet: usize) -> Result<StaticModel> {
        if alphabet > MAX_TOTAL as usize {
            return Err(Error::InvalidModel(format!("alphabet {alphabet} exceeds {MAX_TOTAL}")));
        }
        StaticModel::new(&vec![1; alphabet])
    }
}

impl ProbabilityModel for StaticModel {
    fn alphabet_size(&self) -> usize {
        self.cum.len() - 1
    }

    fn cumulative(&self) -> &[u32] {
        &self.cum
    }

    fn update(&mut self, _symbol: usize) {}
}

/// Order-0 counts starting at 1, incremented by 1 per coded symbol.
#[derive(Debug, Clone)]
pub struct AdaptiveModel {
    freqs: Vec<u32>,
    cum: Vec<u32>,
}

impl AdaptiveModel {
    pub fn new(alphabet: usize) -> Result<AdaptiveModel> {
        if alphabet == 0 || alphabet > MAX_ADAPTIVE_ALPHABET {
            return Err(Error::InvalidModel(format!(
                "adaptive alphabet must be in 1..={MAX_ADAPTIVE_ALPHABET}, got {alphabet}"
            )));
        }
        let freqs = vec![1; alphabet];
        let cum = cumulate(&freqs);
        Ok(AdaptiveModel { freqs, cum })
    }

    fn total(&self) -> u32 {
        *self.cum.last().unwrap()
    }
}

impl ProbabilityModel for AdaptiveModel {
    fn alphabet_size(&self) -> usize {
        self.freqs.len()
    }

    fn cumulative(&self) -> &[u32] {
        &self.cum
    }

    fn update(&mut self, symbol: usize) {
        self.freqs[symbol] += 1;
        if self.total() + 1 >= RESCALE_AT {
            for f in &mut self.freqs {
                *f = f.div_ceil(2);
            }
            self.cum = cumulate(&self.freqs);
        } else {
            for c in &mut self.cum[symbol + 1..] {
                *c += 1;
            }
        }
    }
}

/// One adaptive table per value of the previous symbol in coding order;
/// the first symbol is coded in context 0.
#[derive(Debug, Clone)]
pub struct NeighborModel {
    tables: Vec<AdaptiveModel>,
    context: usize,
}

impl NeighborModel {
    pub fn new(alphabet: usize) -> Result<NeighborModel> {
        if alphabet == 0 || alphabet > MAX_NEIGHBOR_ALPHABET {
            return Err(Error::InvalidModel(format!(
                "neighbor-context alphabet must be in 1..={MAX_NEIGHBOR_ALPHABET}, got {alphabet}"
            )));
        }
        let tables = (0..alphabet)
            .map(|_| AdaptiveModel::new(alphabet))
            .collect::<Result<_>>()?;
        Ok(NeighborModel { tables, context: 0 })
    }
}

impl ProbabilityModel for NeighborModel {
    fn alphabet_size(&self) -> usize {
        self.tables.len()
    }

    fn cumulative(&self) -> &[u32] {
        self.tables[self.context].cumulative()
    }

    fn update(&mut self, symbol: usize) {
        self.tables[self.context].update(symbol);
        self.context = symbol;
    }
}

/// Model identifiers as stored in the entropy container.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum ModelKind {
    /// Uniform static table.
    Static = 0,
    Order0 = 1,
    Neighbor = 2,
}

impl ModelKind {
    pub fn from_byte(b: u8) -> Result<ModelKind> {
        match b {
            0 => Ok(ModelKind::Static),
            1 => Ok(ModelKind::Order0),
            2 => Ok(ModelKind::Neighbor),
            other => Err(Error::InvalidModel(format!("unknown model id {other}"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Static => "static",
            ModelKind::Order0 => "order0",
            ModelKind::Neighbor => "neighbor",
        }
    }

    /// Fresh model for an alphabet of `alphabet` symbols.
    pub fn build(self, alphabet: usize) -> Result<Box<dyn ProbabilityModel>> {
        Ok(match self {
            ModelKind::Static => Box::new(StaticModel::uniform(alphabet)?),
            ModelKind::Order0 => Box::new(AdaptiveModel::new(alphabet)?),
            ModelKind::Neighbor => Box::new(NeighborModel::new(alphabet)?),
        })
    }
}

impl std::str::FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<ModelKind> {
        match s {
            "static" => Ok(ModelKind::Static),
            "order0" => Ok(ModelKind::Order0),
            "neighbor" => Ok(ModelKind::Neighbor),
            other => Err(Error::InvalidModel(format!("unknown model {other:?}"))),
        }
    }
}
