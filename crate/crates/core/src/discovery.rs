//! Reading trained weights as a constitutive model.
//!
//! Terms whose effective magnitude falls below an activity threshold are
//! considered switched off. The surviving terms map onto physical parameters
//! (shear moduli `mu`, stiffness-like `a`, exponential coefficients `b`), and
//! when the active set coincides with a classical family the model is named.

use std::collections::{BTreeMap, BTreeSet};
use std::io;

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::energy::{CannWeights, ExpPair, Term, N_PARAMS, N_TERMS};
use crate::error::{CannError, Result};
use crate::kinematics::DeformationMode;
use crate::optimizer::{loss_gradient, AdamConfig, TrainingRecord};
use crate::stress::{nominal_stress, term_stresses};

/// Relative activity threshold used when none is given.
pub const DEFAULT_RELATIVE_THRESHOLD: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ModelFamily {
    NeoHooke,
    BlatzKo,
    MooneyRivlin,
    Yeoh2,
    Demiray,
}

impl ModelFamily {
    pub const ALL: [ModelFamily; 5] = [
        ModelFamily::NeoHooke,
        ModelFamily::BlatzKo,
        ModelFamily::MooneyRivlin,
        ModelFamily::Yeoh2,
        ModelFamily::Demiray,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelFamily::NeoHooke => "neo-Hooke",
            ModelFamily::BlatzKo => "Blatz-Ko",
            ModelFamily::MooneyRivlin => "Mooney-Rivlin",
            ModelFamily::Yeoh2 => "Yeoh",
            ModelFamily::Demiray => "Demiray",
        }
    }

    pub fn terms(self) -> &'static [Term] {
        match self {
            ModelFamily::NeoHooke => &[Term::LinI1],
            ModelFamily::BlatzKo => &[Term::LinI2],
            ModelFamily::MooneyRivlin => &[Term::LinI1, Term::LinI2],
            ModelFamily::Yeoh2 => &[Term::LinI1, Term::QuadI1],
            ModelFamily::Demiray => &[Term::ExpLinI1],
        }
    }

    fn term_set(self) -> BTreeSet<Term> {
        self.terms().iter().copied().collect()
    }
}

/// Classical incompressible models representable by the eight-term energy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family")]
pub enum NamedModel {
    NeoHooke { mu: f64 },
    BlatzKo { mu: f64 },
    MooneyRivlin { mu1: f64, mu2: f64 },
    /// Yeoh with the cubic coefficient fixed to zero.
    Yeoh2 { a1: f64, a2: f64 },
    Demiray { a: f64, b: f64 },
}

impl NamedModel {
    pub fn family(&self) -> ModelFamily {
        match self {
            NamedModel::NeoHooke { .. } => ModelFamily::NeoHooke,
            NamedModel::BlatzKo { .. } => ModelFamily::BlatzKo,
            NamedModel::MooneyRivlin { .. } => ModelFamily::MooneyRivlin,
            NamedModel::Yeoh2 { .. } => ModelFamily::Yeoh2,
            NamedModel::Demiray { .. } => ModelFamily::Demiray,
        }
    }

    pub fn params(&self) -> Vec<f64> {
        match *self {
            NamedModel::NeoHooke { mu } | NamedModel::BlatzKo { mu } => vec![mu],
            NamedModel::MooneyRivlin { mu1, mu2 } => vec![mu1, mu2],
            NamedModel::Yeoh2 { a1, a2 } => vec![a1, a2],
            NamedModel::Demiray { a, b } => vec![a, b],
        }
    }
}

/// Network weights reproducing a classical model exactly.
pub fn recover_named_model(model: &NamedModel) -> Result<CannWeights> {
    if model.params().iter().any(|p| !(p.is_finite() && *p > 0.0)) {
        return Err(CannError::Domain(format!("model parameters must be positive: {model:?}")));
    }
    let z = CannWeights::zeros();
    Ok(match *model {
        NamedModel::NeoHooke { mu } => CannWeights { lin_i1: mu / 2.0, ..z },
        NamedModel::BlatzKo { mu } => CannWeights { lin_i2: mu / 2.0, ..z },
        NamedModel::MooneyRivlin { mu1, mu2 } => CannWeights { lin_i1: mu1 / 2.0, lin_i2: mu2 / 2.0, ..z },
        NamedModel::Yeoh2 { a1, a2 } => CannWeights { lin_i1: a1 / 2.0, quad_i1: a2 / 2.0, ..z },
        NamedModel::Demiray { a, b } => CannWeights { exp_lin_i1: ExpPair::new(b, a / (2.0 * b)), ..z },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActiveTerm {
    pub term: Term,
    pub magnitude: f64,
    /// The term's raw parameters; `[inner, outer]` for exponentials.
    pub weights: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParam {
    pub value: f64,
    pub unit: String,
}

impl PhysicalParam {
    fn mpa(value: f64) -> Self {
        Self { value, unit: "MPa".into() }
    }

    fn dimensionless(value: f64) -> Self {
        Self { value, unit: "-".into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscoveredModel {
    pub model_name: String,
    pub family: Option<ModelFamily>,
    pub named_model: Option<NamedModel>,
    /// Closest family by active-set symmetric difference, when the active
    /// set matches none exactly.
    pub nearest_family: Option<ModelFamily>,
    pub active_terms: Vec<ActiveTerm>,
    pub physical_params: BTreeMap<String, PhysicalParam>,
    /// Number of inactive terms.
    pub sparsity: usize,
    pub threshold: f64,
}

impl DiscoveredModel {
    pub fn active_set(&self) -> BTreeSet<Term> {
        self.active_terms.iter().map(|t| t.term).collect()
    }

    pub fn param(&self, name: &str) -> Option<f64> {
        self.physical_params.get(name).map(|p| p.value)
    }
}

/// `1e-3` times the largest term magnitude, or the smallest positive float
/// for an all-zero weight vector.
pub fn default_threshold(weights: &CannWeights) -> f64 {
    let max = Term::ALL.iter().map(|t| t.magnitude(weights)).fold(0.0, f64::max);
    (DEFAULT_RELATIVE_THRESHOLD * max).max(f64::MIN_POSITIVE)
}

pub fn classify(weights: &CannWeights, threshold: f64) -> Result<DiscoveredModel> {
    if !(threshold > 0.0 && threshold.is_finite()) {
        return Err(CannError::Domain(format!("activity threshold must be positive, got {threshold}")));
    }
    let flat = weights.to_array();
    let active_terms: Vec<ActiveTerm> = Term::ALL
        .into_iter()
        .filter(|t| t.magnitude(weights) > threshold)
        .map(|t| ActiveTerm {
            term: t,
            magnitude: t.magnitude(weights),
            weights: t.param_indices().iter().map(|&i| flat[i]).collect(),
        })
        .collect();
    let active: BTreeSet<Term> = active_terms.iter().map(|t| t.term).collect();

    let mut params = BTreeMap::new();
    for t in &active {
        let exp_params = |p: ExpPair, a: &str, b: &str, params: &mut BTreeMap<String, PhysicalParam>| {
            params.insert(a.to_string(), PhysicalParam::mpa(2.0 * p.inner * p.outer));
            params.insert(b.to_string(), PhysicalParam::dimensionless(p.inner));
        };
        match t {
            Term::LinI1 => {
                params.insert("mu1".into(), PhysicalParam::mpa(2.0 * weights.lin_i1));
            }
            Term::LinI2 => {
                params.insert("mu2".into(), PhysicalParam::mpa(2.0 * weights.lin_i2));
            }
            Term::QuadI1 => {
                params.insert("q1".into(), PhysicalParam::mpa(2.0 * weights.quad_i1));
            }
            Term::QuadI2 => {
                params.insert("q2".into(), PhysicalParam::mpa(2.0 * weights.quad_i2));
            }
            Term::ExpLinI1 => exp_params(weights.exp_lin_i1, "a1", "b1", &mut params),
            Term::ExpLinI2 => exp_params(weights.exp_lin_i2, "a2", "b2", &mut params),
            Term::ExpQuadI1 => exp_params(weights.exp_quad_i1, "c1", "d1", &mut params),
            Term::ExpQuadI2 => exp_params(weights.exp_quad_i2, "c2", "d2", &mut params),
        }
    }

    let family = ModelFamily::ALL.into_iter().find(|f| f.term_set() == active);
    let named_model = family.map(|f| match f {
        ModelFamily::NeoHooke => NamedModel::NeoHooke { mu: 2.0 * weights.lin_i1 },
        ModelFamily::BlatzKo => NamedModel::BlatzKo { mu: 2.0 * weights.lin_i2 },
        ModelFamily::MooneyRivlin => NamedModel::MooneyRivlin { mu1: 2.0 * weights.lin_i1, mu2: 2.0 * weights.lin_i2 },
        ModelFamily::Yeoh2 => NamedModel::Yeoh2 { a1: 2.0 * weights.lin_i1, a2: 2.0 * weights.quad_i1 },
        ModelFamily::Demiray => NamedModel::Demiray {
            a: 2.0 * weights.exp_lin_i1.inner * weights.exp_lin_i1.outer,
            b: weights.exp_lin_i1.inner,
        },
    });
    if let Some(NamedModel::MooneyRivlin { mu1, mu2 }) = named_model {
        params.insert("mu".into(), PhysicalParam::mpa(mu1 + mu2));
    }
    let nearest_family = match (family, active.is_empty()) {
        (None, false) => ModelFamily::ALL
            .into_iter()
            .min_by_key(|f| f.term_set().symmetric_difference(&active).count()),
        _ => None,
    };

    Ok(DiscoveredModel {
        model_name: family.map_or("generalized", |f| f.name()).to_string(),
        family,
        named_model,
        nearest_family,
        sparsity: N_TERMS - active.len(),
        active_terms,
        physical_params: params,
        threshold,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossSummary {
    pub initial: f64,
    #[serde(rename = "final")]
    pub final_loss: f64,
    pub epochs: usize,
    /// `log10(initial / final)`.
    pub orders_of_reduction: f64,
}

/// Stress at each data point of one mode, split by energy term.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeContributions {
    pub mode: DeformationMode,
    pub lambda: Vec<f64>,
    pub p_data: Vec<f64>,
    pub p_model: Vec<f64>,
    /// `terms[i][k]` is the stress of term `k` (network order) at `lambda[i]`.
    pub terms: Vec<[f64; N_TERMS]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetInfo {
    pub source: String,
    pub n_samples: usize,
    pub modes: Vec<DeformationMode>,
}

/// Serializable summary of a training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub model_name: String,
    pub family: Option<ModelFamily>,
    pub named_model: Option<NamedModel>,
    pub nearest_family: Option<ModelFamily>,
    pub active_terms: Vec<ActiveTerm>,
    pub physical_params: BTreeMap<String, PhysicalParam>,
    pub sparsity: usize,
    pub threshold: f64,
    pub weights: CannWeights,
    pub loss_history_summary: LossSummary,
    pub final_gradient_norm: f64,
    pub loss_pooling: String,
    pub config: AdamConfig,
    pub dataset: DatasetInfo,
    pub term_contributions: Vec<ModeContributions>,
}

impl Report {
    pub fn discovered(&self) -> DiscoveredModel {
        DiscoveredModel {
            model_name: self.model_name.clone(),
            family: self.family,
            named_model: self.named_model,
            nearest_family: self.nearest_family,
            active_terms: self.active_terms.clone(),
            physical_params: self.physical_params.clone(),
            sparsity: self.sparsity,
            threshold: self.threshold,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let mut buf = Vec::new();
        write_json(self, &mut buf)?;
        Ok(String::from_utf8(buf).expect("serde_json emits UTF-8"))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

pub fn mode_contributions(weights: &CannWeights, dataset: &Dataset) -> Result<Vec<ModeContributions>> {
    dataset
        .modes()
        .into_iter()
        .map(|mode| {
            let mut c = ModeContributions { mode, lambda: vec![], p_data: vec![], p_model: vec![], terms: vec![] };
            for s in dataset.samples_for(mode) {
                c.lambda.push(s.lambda);
                c.p_data.push(s.stress);
                c.p_model.push(nominal_stress(weights, mode, s.lambda)?.p1);
                c.terms.push(term_stresses(weights, mode, s.lambda)?);
            }
            Ok(c)
        })
        .collect()
}

/// Builds the report for a finished run. `threshold = None` uses
/// [`default_threshold`] on the final weights.
pub fn report(record: &TrainingRecord, dataset: &Dataset, threshold: Option<f64>) -> Result<Report> {
    let w = record.final_weights;
    let model = classify(&w, threshold.unwrap_or_else(|| default_threshold(&w)))?;
    let initial = record.loss_history.first().copied().unwrap_or(record.final_loss);
    let grad = loss_gradient(&w, dataset)?;
    Ok(Report {
        model_name: model.model_name,
        family: model.family,
        named_model: model.named_model,
        nearest_family: model.nearest_family,
        active_terms: model.active_terms,
        physical_params: model.physical_params,
        sparsity: model.sparsity,
        threshold: model.threshold,
        weights: w,
        loss_history_summary: LossSummary {
            initial,
            final_loss: record.final_loss,
            epochs: record.epochs_run,
            orders_of_reduction: (initial / record.final_loss).log10(),
        },
        final_gradient_norm: grad.iter().map(|g| g * g).sum::<f64>().sqrt(),
        loss_pooling: "per-point".into(),
        config: record.config,
        dataset: DatasetInfo { source: dataset.source.clone(), n_samples: dataset.len(), modes: dataset.modes() },
        term_contributions: mode_contributions(&w, dataset)?,
    })
}

/// Pretty JSON with every float written with 17 significant digits.
pub fn write_json<T: Serialize, W: io::Write>(value: &T, writer: W) -> Result<()> {
    let mut ser = serde_json::Serializer::with_formatter(writer, SignificantDigits::default());
    value.serialize(&mut ser)?;
    Ok(())
}

#[derive(Default)]
struct SignificantDigits {
    inner: serde_json::ser::PrettyFormatter<'static>,
}

impl serde_json::ser::Formatter for SignificantDigits {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.begin_array(writer)
    }

    fn end_array<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.end_array(writer)
    }

    fn begin_array_value<W: ?Sized + io::Write>(&mut self, writer: &mut W, first: bool) -> io::Result<()> {
        self.inner.begin_array_value(writer, first)
    }

    fn end_array_value<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.end_array_value(writer)
    }

    fn begin_object<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.begin_object(writer)
    }

    fn end_object<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.end_object(writer)
    }

    fn begin_object_key<W: ?Sized + io::Write>(&mut self, writer: &mut W, first: bool) -> io::Result<()> {
        self.inner.begin_object_key(writer, first)
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.begin_object_value(writer)
    }

    fn end_object_value<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.end_object_value(writer)
    }
}

// Keep the parameter count visible next to the serialized layout.
const _: () = assert!(N_PARAMS == 12);
