//! TOML configuration files with dotted-key overrides.
//!
//! Every config type implements `Default`, so a file only needs the keys it
//! changes. Loading starts from the defaults, merges the file over them and
//! then applies `key.path=value` overrides from the command line.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use toml::{Table, Value};

use crate::rl::CurriculumLevel;
use crate::{Error, Result};

/// Key of a training config that names a separate curriculum file. Relative
/// paths are taken from the directory of the config file.
pub const CURRICULUM_FILE_KEY: &str = "curriculum_file";

fn read_table(path: &Path) -> Result<Table> {
    let text = fs::read_to_string(path).map_err(|source| Error::File {
        path: path.to_path_buf(),
        source,
    })?;
    text.parse::<Table>()
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

/// Recursively overwrite `base` with `over`; sub-tables merge, everything
/// else is replaced.
pub fn merge(base: &mut Table, over: Table) {
    for (k, v) in over {
        match (base.get_mut(&k), v) {
            (Some(Value::Table(b)), Value::Table(o)) => merge(b, o),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

/// Parse a command-line value as a TOML value, falling back to a bare
/// string.
fn parse_value(raw: &str) -> Value {
    format!("v = {raw}")
        .parse::<Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_string()))
}

/// Apply one `a.b.c=value` override.
pub fn apply_override(table: &mut Table, kv: &str) -> Result<()> {
    let (key, raw) = kv
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override `{kv}` is not key=value")))?;
    let parts: Vec<&str> = key.trim().split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(Error::Config(format!("bad override key `{key}`")));
    }
    let (last, path) = parts.split_last().expect("split yields at least one part");
    let mut t = table;
    for p in path {
        let entry = t.entry(p.to_string()).or_insert_with(|| Value::Table(Table::new()));
        t = entry
            .as_table_mut()
            .ok_or_else(|| Error::Config(format!("`{p}` in `{key}` is not a table")))?;
    }
    t.insert(last.to_string(), parse_value(raw.trim()));
    Ok(())
}

pub fn to_table<T: Serialize>(value: &T) -> Result<Table> {
    Table::try_from(value).map_err(|e| Error::Config(e.to_string()))
}

pub fn from_table<T: DeserializeOwned>(table: Table) -> Result<T> {
    Value::Table(table)
        .try_into()
        .map_err(|e: toml::de::Error| Error::Config(e.to_string()))
}

pub fn to_toml_string<T: Serialize>(value: &T) -> Result<String> {
    toml::to_string(value).map_err(|e| Error::Config(e.to_string()))
}

/// Defaults, then the file (if any), then the overrides.
pub fn load<T: DeserializeOwned + Serialize + Default>(path: Option<&Path>, overrides: &[String]) -> Result<T> {
    load_onto(&T::default(), path, overrides)
}

/// Like [`load`] with `base` in place of the type's defaults.
pub fn load_onto<T: DeserializeOwned + Serialize>(base: &T, path: Option<&Path>, overrides: &[String]) -> Result<T> {
    from_table(layered(base, path, overrides)?)
}

fn layered<T: Serialize>(base: &T, path: Option<&Path>, overrides: &[String]) -> Result<Table> {
    let mut table = to_table(base)?;
    if let Some(p) = path {
        merge(&mut table, read_table(p)?);
    }
    for o in overrides {
        apply_override(&mut table, o)?;
    }
    Ok(table)
}

#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
struct CurriculumFile {
    level: Vec<CurriculumLevel>,
}

/// Curriculum levels from a file of `[[level]]` tables.
pub fn load_curriculum(path: &Path) -> Result<Vec<CurriculumLevel>> {
    let f: CurriculumFile = from_table(read_table(path)?)?;
    for l in &f.level {
        l.check()?;
    }
    Ok(f.level)
}

/// Like [`load_onto`], but a top-level `curriculum_file` key is replaced by
/// the levels it points to.
pub fn load_with_curriculum<T: DeserializeOwned + Serialize>(
    base: &T,
    path: Option<&Path>,
    overrides: &[String],
) -> Result<T> {
    let mut table = layered(base, path, overrides)?;
    if let Some(v) = table.remove(CURRICULUM_FILE_KEY) {
        let name = v
            .as_str()
            .ok_or_else(|| Error::Config(format!("{CURRICULUM_FILE_KEY} must be a string")))?;
        let dir = path.and_then(Path::parent).unwrap_or(Path::new("."));
        let levels = load_curriculum(&dir.join(name))?;
        table.insert("curriculum".into(), Value::try_from(levels).map_err(|e| Error::Config(e.to_string()))?);
    }
    from_table(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cpg::OscillatorParams;
    use crate::rl::TrainConfig;

    #[test]
    fn defaults_round_trip() {
        let p: OscillatorParams = load(None, &[]).unwrap();
        assert_eq!(p, OscillatorParams::TABLE_I);
        let t: TrainConfig = from_table(to_table(&TrainConfig::smoke()).unwrap()).unwrap();
        assert_eq!(t, TrainConfig::smoke());
    }

    #[test]
    fn overrides_nest_and_parse() {
        let t: TrainConfig = load(None, &["seed=7".into(), "env.randomize=false".into(), "variant=\"vanilla-ppo\"".into()]).unwrap();
        assert_eq!(t.seed, 7);
        assert!(!t.env.randomize);
        assert_eq!(t.variant.c(), 0.0);
        assert!(!t.variant.uses_cpg());
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(load::<OscillatorParams>(None, &["bogus=1".into()]).is_err());
        assert!(load::<OscillatorParams>(None, &["b".into()]).is_err());
    }

    #[test]
    fn file_then_override() {
        let dir = std::env::temp_dir().join(format!("msnake-config-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        fs::write(dir.join("levels.toml"), "[[level]]\nlevel = 1\nrho_lo = 1.0\nrho_hi = 1.5\nangle_lo = -10.0\nangle_hi = 10.0\nradius = 0.3\n").unwrap();
        fs::write(dir.join("train.toml"), "seed = 3\ncurriculum_file = \"levels.toml\"\n").unwrap();
        let t: TrainConfig = load_with_curriculum(&TrainConfig::default(), Some(&dir.join("train.toml")), &["seed=4".into()]).unwrap();
        assert_eq!(t.seed, 4);
        assert_eq!(t.curriculum.len(), 1);
        assert_eq!(t.curriculum[0].radius, 0.3);
        fs::remove_dir_all(&dir).unwrap();
    }
}
