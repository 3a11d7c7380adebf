//! JSON job configuration: the single input format of the command-line
//! front end.  Complex scalars are `[re, im]` pairs, matrices row-major
//! nested arrays of such pairs.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::calculus::{PathKind, PathOptions};
use crate::error::{HalfcalcError, Result};
use crate::functions::{
    constant, exponential_kernel, rational, regularizer, resolvent_kernel, HalfPlaneFunction,
};
use crate::linalg::CMatrix;
use crate::semigroup::{make_generator, Generator, SpectralForm, TimeGrid};

pub const CONFIG_SCHEMA: &str = "halfcalc-config/1";

fn default_schema() -> String {
    CONFIG_SCHEMA.to_string()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum GeneratorSpec {
    /// full matrix, row-major
    Dense { entries: Vec<Vec<[f64; 2]>> },
    /// diagonal matrix from its spectrum (spectral form comes for free)
    Diagonal { spectrum: Vec<[f64; 2]> },
    /// eigenvalues plus an explicit eigenbasis and its inverse
    Spectral {
        eigenvalues: Vec<[f64; 2]>,
        v: Vec<Vec<[f64; 2]>>,
        vinv: Vec<Vec<[f64; 2]>>,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SymbolSpec {
    Constant { value: [f64; 2] },
    /// g_mu(z) = 1/(mu - z), Re mu > 0
    Resolvent { mu: [f64; 2] },
    /// g_t(z) = e^{tz}, t >= 0
    Exponential { t: f64 },
    Rational {
        zeros: Vec<[f64; 2]>,
        poles: Vec<[f64; 2]>,
        gain: [f64; 2],
    },
    /// e(z) = (1 - z)^{-2}
    Regularizer,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub step: f64,
    pub count: usize,
    pub tail_tolerance: Option<f64>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    pub lambda_tol: Option<f64>,
    pub contour_eps: Option<f64>,
    pub contour_y: Option<f64>,
    pub phillips_panels: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    #[serde(default = "default_schema")]
    pub schema: String,
    #[serde(default)]
    pub generator: Option<GeneratorSpec>,
    #[serde(default)]
    pub symbol: Option<SymbolSpec>,
    /// additional symbols for the laws/boundedness batteries
    #[serde(default)]
    pub symbols: Vec<SymbolSpec>,
    /// observation operator C, row-major (observability command)
    #[serde(default)]
    pub observation: Option<Vec<Vec<[f64; 2]>>>,
    #[serde(default)]
    pub grid: Option<GridSpec>,
    /// path names; empty means "all applicable"
    #[serde(default)]
    pub paths: Vec<String>,
    #[serde(default)]
    pub tolerances: Option<Tolerances>,
    #[serde(default)]
    pub seed: Option<u64>,
    /// multistart count for the directional search
    #[serde(default)]
    pub starts: Option<usize>,
    /// size for the diagonal benchmark example
    #[serde(default)]
    pub example_size: Option<usize>,
}

fn cx(p: [f64; 2]) -> Complex64 {
    Complex64::new(p[0], p[1])
}

pub fn parse_matrix(rows: &[Vec<[f64; 2]>]) -> Result<CMatrix> {
    if rows.is_empty() {
        return Err(HalfcalcError::Validation("matrix has no rows".into()));
    }
    let cols = rows[0].len();
    if cols == 0 || rows.iter().any(|r| r.len() != cols) {
        return Err(HalfcalcError::Validation(
            "matrix rows must be nonempty and of equal length".into(),
        ));
    }
    let entries = rows.iter().flatten().map(|&p| cx(p)).collect();
    CMatrix::new(rows.len(), cols, entries)
}

impl JobConfig {
    pub fn from_str(text: &str) -> Result<Self> {
        let cfg: JobConfig = serde_json::from_str(text)
            .map_err(|e| HalfcalcError::Validation(format!("config parse: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema != CONFIG_SCHEMA {
            return Err(HalfcalcError::Validation(format!(
                "unknown config schema '{}', expected '{CONFIG_SCHEMA}'",
                self.schema
            )));
        }
        if let Some(g) = &self.grid {
            if !(g.step > 0.0) || g.count == 0 {
                return Err(HalfcalcError::Validation(
                    "grid step must be positive and count nonzero".into(),
                ));
            }
            if let Some(tt) = g.tail_tolerance {
                if !(tt > 0.0) {
                    return Err(HalfcalcError::Validation(
                        "grid tail tolerance must be positive".into(),
                    ));
                }
            }
        }
        if let Some(t) = &self.tolerances {
            for (name, v) in [
                ("lambda_tol", t.lambda_tol),
                ("contour_eps", t.contour_eps),
                ("contour_y", t.contour_y),
            ] {
                if let Some(v) = v {
                    if !(v > 0.0) {
                        return Err(HalfcalcError::Validation(format!(
                            "tolerance {name} must be positive"
                        )));
                    }
                }
            }
            if t.phillips_panels == Some(0) {
                return Err(HalfcalcError::Validation(
                    "phillips_panels must be positive".into(),
                ));
            }
        }
        for name in &self.paths {
            parse_path(name)?;
        }
        Ok(())
    }

    pub fn build_generator(&self) -> Result<Generator> {
        let spec = self.generator.as_ref().ok_or_else(|| {
            HalfcalcError::Validation("this command needs a generator spec".into())
        })?;
        match spec {
            GeneratorSpec::Dense { entries } => {
                let a = parse_matrix(entries)?;
                make_generator(a, None)
            }
            GeneratorSpec::Diagonal { spectrum } => {
                let eigs: Vec<Complex64> = spectrum.iter().map(|&p| cx(p)).collect();
                let n = eigs.len();
                let a = CMatrix::from_diag(&eigs);
                let form = SpectralForm::new(eigs, CMatrix::identity(n), CMatrix::identity(n))?;
                make_generator(a, Some(form))
            }
            GeneratorSpec::Spectral {
                eigenvalues,
                v,
                vinv,
            } => {
                let eigs: Vec<Complex64> = eigenvalues.iter().map(|&p| cx(p)).collect();
                let v = parse_matrix(v)?;
                let vinv = parse_matrix(vinv)?;
                let form = SpectralForm::new(eigs.clone(), v.clone(), vinv.clone())?;
                let a = form.assemble(|l| l)?;
                make_generator(a, Some(form))
            }
        }
    }

    pub fn build_symbol(&self) -> Result<HalfPlaneFunction> {
        let spec = self
            .symbol
            .as_ref()
            .ok_or_else(|| HalfcalcError::Validation("this command needs a symbol spec".into()))?;
        symbol_from_spec(spec)
    }

    /// the `symbol` field followed by the `symbols` battery, in order
    pub fn symbol_list(&self) -> Result<Vec<HalfPlaneFunction>> {
        let mut out = Vec::new();
        if let Some(s) = &self.symbol {
            out.push(symbol_from_spec(s)?);
        }
        for s in &self.symbols {
            out.push(symbol_from_spec(s)?);
        }
        Ok(out)
    }

    pub fn path_kinds(&self) -> Result<Vec<PathKind>> {
        self.paths.iter().map(|n| parse_path(n)).collect()
    }

    pub fn build_grid(&self, gen: &Generator) -> Result<TimeGrid> {
        match &self.grid {
            Some(g) => TimeGrid::new(g.step, g.count, g.tail_tolerance.unwrap_or(1e-10)),
            None => TimeGrid::default_for(gen),
        }
    }

    pub fn path_options(&self, gen: &Generator) -> Result<PathOptions> {
        let mut opts = PathOptions::default();
        if self.grid.is_some() {
            opts.grid = Some(self.build_grid(gen)?);
        }
        if let Some(t) = &self.tolerances {
            if let Some(v) = t.lambda_tol {
                opts.lambda_tol = v;
            }
            if let Some(v) = t.contour_eps {
                opts.contour_eps = Some(v);
            }
            if let Some(v) = t.contour_y {
                opts.contour_y = v;
            }
            if let Some(v) = t.phillips_panels {
                opts.phillips_panels = v;
            }
        }
        Ok(opts)
    }

    pub fn observation_matrix(&self, dim: usize) -> Result<CMatrix> {
        match &self.observation {
            Some(rows) => {
                let c = parse_matrix(rows)?;
                if c.cols() != dim {
                    return Err(HalfcalcError::Validation(format!(
                        "observation has {} columns for a dimension-{dim} generator",
                        c.cols()
                    )));
                }
                Ok(c)
            }
            None => Ok(CMatrix::identity(dim)),
        }
    }
}

pub fn symbol_from_spec(spec: &SymbolSpec) -> Result<HalfPlaneFunction> {
    match spec {
        SymbolSpec::Constant { value } => Ok(constant(cx(*value))),
        SymbolSpec::Resolvent { mu } => resolvent_kernel(cx(*mu)),
        SymbolSpec::Exponential { t } => exponential_kernel(*t),
        SymbolSpec::Rational { zeros, poles, gain } => {
            let zeros: Vec<Complex64> = zeros.iter().map(|&p| cx(p)).collect();
            let poles: Vec<Complex64> = poles.iter().map(|&p| cx(p)).collect();
            rational(&zeros, &poles, cx(*gain))
        }
        SymbolSpec::Regularizer => Ok(regularizer()),
    }
}

pub fn parse_path(name: &str) -> Result<PathKind> {
    match name {
        "oracle" | "spectral-oracle" => Ok(PathKind::SpectralOracle),
        "phillips" => Ok(PathKind::Phillips),
        "contour" => Ok(PathKind::Contour),
        "output-map" | "outputmap" => Ok(PathKind::OutputMap),
        other => {
            if let Some(inner) = other
                .strip_prefix("lambda-limit(")
                .and_then(|s| s.strip_suffix(')'))
            {
                Ok(PathKind::LambdaLimit(Box::new(parse_path(inner)?)))
            } else {
                Err(HalfcalcError::Validation(format!("unknown path '{other}'")))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_minimal_config() {
        let cfg = JobConfig::from_str(
            r#"{
                "generator": {"kind": "diagonal", "spectrum": [[-1.0, 0.0], [-2.0, 0.0]]},
                "symbol": {"kind": "resolvent", "mu": [1.0, 0.0]}
            }"#,
        )
        .unwrap();
        let gen = cfg.build_generator().unwrap();
        assert_eq!(gen.dim(), 2);
        assert!(gen.spectral().is_some());
        let g = cfg.build_symbol().unwrap();
        assert!((g.eval(Complex64::new(0.0, 0.0)) - Complex64::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn rejects_bad_schema_and_fields() {
        assert!(JobConfig::from_str(r#"{"schema": "nope"}"#).is_err());
        assert!(JobConfig::from_str(r#"{"unknown_field": 1}"#).is_err());
        assert!(JobConfig::from_str(
            r#"{"grid": {"step": 0.0, "count": 4, "tail_tolerance": null}}"#
        )
        .is_err());
        assert!(JobConfig::from_str(r#"{"paths": ["bogus"]}"#).is_err());
    }

    #[test]
    fn dense_and_spectral_generators() {
        let cfg = JobConfig::from_str(
            r#"{
                "generator": {"kind": "dense", "entries": [[[-1.0, 0.0], [1.0, 0.0]], [[0.0, 0.0], [-2.0, 0.0]]]}
            }"#,
        )
        .unwrap();
        let gen = cfg.build_generator().unwrap();
        assert_eq!(gen.dim(), 2);
        assert!(gen.spectral().is_none());

        let cfg = JobConfig::from_str(
            r#"{
                "generator": {"kind": "spectral",
                    "eigenvalues": [[-1.0, 0.0], [-2.0, 0.0]],
                    "v": [[[1.0, 0.0], [1.0, 0.0]], [[0.0, 0.0], [-1.0, 0.0]]],
                    "vinv": [[[1.0, 0.0], [1.0, 0.0]], [[0.0, 0.0], [-1.0, 0.0]]]}
            }"#,
        )
        .unwrap();
        let gen = cfg.build_generator().unwrap();
        assert!(gen.spectral().is_some());
        assert!((gen.matrix()[(0, 1)].re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unstable_generator_is_an_error() {
        let cfg = JobConfig::from_str(
            r#"{"generator": {"kind": "diagonal", "spectrum": [[0.5, 0.0]]}}"#,
        )
        .unwrap();
        assert!(matches!(
            cfg.build_generator(),
            Err(HalfcalcError::Unstable { .. })
        ));
    }

    #[test]
    fn path_names_round_trip() {
        for name in ["oracle", "phillips", "contour", "output-map", "lambda-limit(phillips)"] {
            let p = parse_path(name).unwrap();
            if name == "oracle" {
                assert_eq!(p.to_string(), "spectral-oracle");
            } else {
                assert_eq!(p.to_string(), name.replace("outputmap", "output-map"));
            }
        }
        assert!(parse_path("lambda-limit(bogus)").is_err());
    }

    #[test]
    fn symbol_specs_build() {
        for (text, probe, want) in [
            (r#"{"kind": "constant", "value": [2.0, 1.0]}"#, 0.0, Complex64::new(2.0, 1.0)),
            (r#"{"kind": "resolvent", "mu": [2.0, 0.0]}"#, -1.0, Complex64::new(1.0 / 3.0, 0.0)),
            (r#"{"kind": "regularizer"}"#, -1.0, Complex64::new(0.25, 0.0)),
        ] {
            let spec: SymbolSpec = serde_json::from_str(text).unwrap();
            let g = symbol_from_spec(&spec).unwrap();
            assert!((g.eval(Complex64::new(probe, 0.0)) - want).norm() < 1e-14);
        }
        let bad: SymbolSpec =
            serde_json::from_str(r#"{"kind": "resolvent", "mu": [-1.0, 0.0]}"#).unwrap();
        assert!(symbol_from_spec(&bad).is_err());
    }

    #[test]
    fn config_json_round_trips() {
        let cfg = JobConfig::from_str(
            r#"{
                "generator": {"kind": "diagonal", "spectrum": [[-1.0, 0.0]]},
                "symbol": {"kind": "exponential", "t": 0.25},
                "paths": ["phillips", "contour"],
                "seed": 7,
                "tolerances": {"phillips_panels": 128}
            }"#,
        )
        .unwrap();
        let text = serde_json::to_string(&cfg).unwrap();
        let back = JobConfig::from_str(&text).unwrap();
        assert_eq!(back.seed, Some(7));
        assert_eq!(back.paths, vec!["phillips", "contour"]);
    }
}
