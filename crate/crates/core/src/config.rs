//! Run configuration: a flat TOML table whose keys are the run settings plus
//! the [`ModelParams`] field names. Unknown keys are errors.
//!
//! ```toml
//! model = "hzspf"
//! input = "scan.pgm"        # or: synth = "single-bias", case = "..."
//! truth = "scan_truth.pgm"
//! output_dir = "out"
//! alpha = 10.0
//! init = "circle:64,64,30"
//! ```

use std::path::PathBuf;

use toml::{Table, Value};

use crate::error::{Error, Result};
use crate::evolve::{Model, ModelParams};
use crate::synth::{Suite, SynthSpec};

/// Keys consumed by [`RunConfig`] itself; everything else must be a model parameter.
const RUN_KEYS: [&str; 7] = ["model", "input", "synth", "case", "truth", "output_dir", "seed"];

#[derive(Debug, Clone, PartialEq)]
pub enum Input {
    Path(PathBuf),
    Synth { name: String, spec: SynthSpec },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub model: Model,
    pub params: ModelParams,
    pub input: Input,
    pub truth: Option<PathBuf>,
    pub output_dir: PathBuf,
    pub seed: Option<u64>,
}

pub fn parse_table(text: &str) -> Result<Table> {
    text.parse::<Table>().map_err(|e| Error::Config(e.to_string()))
}

/// Parses a `key=value` override. The value is read as a TOML value when
/// possible (`3`, `0.5`, `true`, `"x"`) and as a bare string otherwise.
pub fn parse_override(assignment: &str) -> Result<(String, Value)> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override `{assignment}` is not of the form key=value")))?;
    let key = key.trim();
    if key.is_empty() || !key.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
        return Err(Error::Config(format!("override `{assignment}` has an invalid key")));
    }
    let raw = raw.trim();
    let value = format!("v = {raw}")
        .parse::<Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_string()));
    Ok((key.to_string(), value))
}

pub fn apply_overrides<'a>(table: &mut Table, overrides: impl IntoIterator<Item = &'a str>) -> Result<()> {
    for o in overrides {
        let (key, value) = parse_override(o)?;
        table.insert(key, value);
    }
    Ok(())
}

/// Deserializes the model-parameter keys of `table`, rejecting unknown keys,
/// and validates the result.
pub fn params_from_table(table: &Table) -> Result<ModelParams> {
    let params: ModelParams = Value::Table(table.clone())
        .try_into()
        .map_err(|e: toml::de::Error| Error::Config(e.message().to_string()))?;
    params.validate()?;
    Ok(params)
}

fn take_string(table: &mut Table, key: &'static str) -> Result<Option<String>> {
    match table.remove(key) {
        None => Ok(None),
        Some(Value::String(s)) => Ok(Some(s)),
        Some(other) => Err(Error::param(key, format!("expected a string, got {}", other.type_str()))),
    }
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        Self::from_table(parse_table(text)?)
    }

    pub fn from_table(mut table: Table) -> Result<Self> {
        let model = match take_string(&mut table, "model")? {
            Some(s) => s.parse()?,
            None => Model::Hzspf,
        };
        let seed = match table.remove("seed") {
            None => None,
            Some(Value::Integer(n)) if n >= 0 => Some(n as u64),
            Some(other) => return Err(Error::param("seed", format!("expected a non-negative integer, got {other}"))),
        };
        let path_input = take_string(&mut table, "input")?;
        let case = take_string(&mut table, "case")?;
        let synth = table.remove("synth");
        let input = match (path_input, synth) {
            (Some(_), Some(_)) => return Err(Error::param("input", "give either `input` or `synth`, not both")),
            (None, None) => return Err(Error::param("input", "no input image (set `input` or `synth`)")),
            (Some(path), None) => {
                if case.is_some() {
                    return Err(Error::param("case", "only meaningful with `synth`"));
                }
                Input::Path(PathBuf::from(path))
            }
            (None, Some(Value::String(name))) => {
                let suite: Suite = name.parse()?;
                let cases = suite.cases(seed.unwrap_or(0));
                let (name, spec) = match &case {
                    None => cases.into_iter().next().expect("every suite has a case"),
                    Some(c) => cases.into_iter().find(|(n, _)| n == c).ok_or_else(|| {
                        Error::param("case", format!("suite `{suite}` has no case `{c}`"))
                    })?,
                };
                Input::Synth { name, spec }
            }
            (None, Some(Value::Table(t))) => {
                if case.is_some() {
                    return Err(Error::param("case", "only meaningful with a named suite"));
                }
                let mut spec: SynthSpec = Value::Table(t)
                    .try_into()
                    .map_err(|e: toml::de::Error| Error::Config(format!("synth: {}", e.message())))?;
                if let Some(s) = seed {
                    spec.seed = s;
                }
                spec.validate()?;
                Input::Synth { name: "custom".into(), spec }
            }
            (None, Some(other)) => {
                return Err(Error::param("synth", format!("expected a suite name or a table, got {}", other.type_str())))
            }
        };
        let truth = take_string(&mut table, "truth")?.map(PathBuf::from);
        let output_dir = PathBuf::from(take_string(&mut table, "output_dir")?.unwrap_or_else(|| "out".into()));
        debug_assert!(RUN_KEYS.iter().all(|k| !table.contains_key(*k)));
        let params = params_from_table(&table)?;
        Ok(RunConfig {
            model,
            params,
            input,
            truth,
            output_dir,
            seed,
        })
    }

    /// Every effective setting, defaults included, as a config that parses back.
    pub fn echo(&self) -> String {
        let mut table = Table::new();
        table.insert("model".into(), Value::String(self.model.name().into()));
        let mut header = String::new();
        match &self.input {
            Input::Path(p) => {
                table.insert("input".into(), Value::String(p.display().to_string()));
            }
            Input::Synth { name, spec } => {
                header = format!("# synthetic case: {name}\n");
                table.insert("synth".into(), Value::try_from(spec).expect("synth specs always serialize"));
            }
        }
        if let Some(t) = &self.truth {
            table.insert("truth".into(), Value::String(t.display().to_string()));
        }
        table.insert("output_dir".into(), Value::String(self.output_dir.display().to_string()));
        if let Value::Table(p) = Value::try_from(&self.params).expect("params always serialize") {
            table.extend(p);
        }
        header + &toml::to_string(&table).expect("table always serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_fill_missing_params() {
        let cfg = RunConfig::from_toml_str("input = \"a.pgm\"").unwrap();
        assert_eq!(cfg.model, Model::Hzspf);
        assert_eq!(cfg.params, ModelParams::default());
        assert_eq!(cfg.input, Input::Path("a.pgm".into()));
    }

    #[test]
    fn unknown_key_is_an_error_naming_it() {
        let err = RunConfig::from_toml_str("input = \"a.pgm\"\nalpah = 3.0").unwrap_err();
        assert!(err.to_string().contains("alpah"), "{err}");
    }

    #[test]
    fn invalid_value_names_the_field() {
        let err = RunConfig::from_toml_str("input = \"a.pgm\"\nw = 2.0").unwrap_err();
        assert!(err.to_string().contains("`w`"), "{err}");
        let err = RunConfig::from_toml_str("input = \"a.pgm\"\nmodel = \"rsf\"").unwrap_err();
        assert!(err.to_string().contains("model"), "{err}");
    }

    #[test]
    fn overrides_parse_typed_values() {
        let mut t = parse_table("input = \"a.pgm\"").unwrap();
        apply_overrides(&mut t, ["alpha=7", "binary_step=false", "init=circle:10,10,4", "model=cv"]).unwrap();
        let cfg = RunConfig::from_table(t).unwrap();
        assert_eq!(cfg.params.alpha, 7.0);
        assert!(!cfg.params.binary_step);
        assert_eq!(cfg.params.init.to_string(), "circle:10,10,4");
        assert_eq!(cfg.model, Model::Cv);
        assert!(parse_override("novalue").is_err());
        assert!(parse_override("bad key=1").is_err());
    }

    #[test]
    fn integer_literals_fill_float_fields() {
        let cfg = RunConfig::from_toml_str("input = \"a.pgm\"\nalpha = 12\nmax_iter = 40").unwrap();
        assert_eq!(cfg.params.alpha, 12.0);
        assert_eq!(cfg.params.max_iter, 40);
    }

    #[test]
    fn synth_suite_and_case() {
        let cfg = RunConfig::from_toml_str("synth = \"noise-sweep\"\ncase = \"gaussian-0.03\"\nseed = 5").unwrap();
        match cfg.input {
            Input::Synth { name, spec } => {
                assert_eq!(name, "gaussian-0.03");
                assert_eq!(spec.seed, 7);
            }
            other => panic!("{other:?}"),
        }
        assert!(RunConfig::from_toml_str("synth = \"noise-sweep\"\ncase = \"nope\"").is_err());
        assert!(RunConfig::from_toml_str("input = \"a\"\nsynth = \"single-bias\"").is_err());
        assert!(RunConfig::from_toml_str("alpha = 1.0").is_err());
    }

    #[test]
    fn inline_synth_table() {
        let text = r#"
            model = "sbgfrls"
            [synth]
            width = 32
            height = 32
            background_intensity = 0.1
            shapes = [{ kind = "disk", cx = 16.0, cy = 16.0, radius = 6.0, intensity = 0.9 }]
        "#;
        let cfg = RunConfig::from_toml_str(text).unwrap();
        assert!(matches!(cfg.input, Input::Synth { ref spec, .. } if spec.width == 32));
        let bad = text.replace("0.9", "1.9");
        assert!(RunConfig::from_toml_str(&bad).is_err());
    }

    #[test]
    fn echo_reparses_to_the_same_params() {
        let cfg = RunConfig::from_toml_str("input = \"a.pgm\"\nalpha = 3.5\ninit = \"rect:1,1,8,8\"").unwrap();
        let echo = cfg.echo();
        let back = RunConfig::from_toml_str(&echo).unwrap();
        assert_eq!(back.params, cfg.params);
        assert!(echo.contains("sigma_reg"));

        let synth = RunConfig::from_toml_str("synth = \"multi3-bias\"\nseed = 9\nmodel = \"cv\"").unwrap();
        let back = RunConfig::from_toml_str(&synth.echo()).unwrap();
        assert_eq!(back.model, Model::Cv);
        match (&synth.input, &back.input) {
            (Input::Synth { spec: a, .. }, Input::Synth { spec: b, .. }) => assert_eq!(a, b),
            other => panic!("{other:?}"),
        }
    }
}
