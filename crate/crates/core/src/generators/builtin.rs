//! Built-in generators by name, configured with `key=value` options.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::str::FromStr;

use super::{EqArea, EqAreaMode, Ext, GenError, Generator, Legal, Lin, Samples, Sub};
use crate::scenarios::robot::{OdSystem, OpacitySystem};
use crate::trace::Value;

/// Options of a built-in generator, written `key=value,key=value`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Options(BTreeMap<String, String>);

impl Options {
    pub fn parse(text: &str) -> Result<Self, GenError> {
        let mut map = BTreeMap::new();
        for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (k, v) = item.split_once('=').ok_or_else(|| {
                GenError::Unavailable(format!("option `{item}` is not `key=value`"))
            })?;
            map.insert(k.trim().to_string(), v.trim().to_string());
        }
        Ok(Options(map))
    }

    pub fn with(mut self, key: &str, value: &str) -> Self {
        self.0.insert(key.into(), value.into());
        self
    }

    fn get<T: FromStr>(&self, key: &str, default: T) -> Result<T, GenError> {
        match self.0.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| GenError::Unavailable(format!("bad value `{v}` for option `{key}`"))),
        }
    }

    fn str(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    fn check_known(&self, kind: &str, known: &[&str]) -> Result<(), GenError> {
        match self.0.keys().find(|k| !known.contains(&k.as_str())) {
            Some(k) => Err(GenError::Unavailable(format!(
                "`{kind}` has no option `{k}`"
            ))),
            None => Ok(()),
        }
    }
}

fn value_of(text: &str) -> Value {
    text.parse::<i64>()
        .map(Value::Int)
        .unwrap_or_else(|_| Value::sym(text))
}

/// Names of the built-in generators.
pub const BUILTINS: &[&str] = &["sub", "ext", "lin", "legal", "samples", "eqarea"];

/// A built-in generator.
///
/// - `sub`, `lin`, `legal`: no options.
/// - `ext`: `values=v1|v2|...`, the response values (required).
/// - `samples`: `n` (5), `seed` (0), `strategy` (1), `leak` (0.5).
/// - `eqarea`: `mode` (`1w` or `aat`, default `1w`), `system` (`opaque` or
///   `non-opaque`, default `opaque`), `limit` (100000).
pub fn builtin(kind: &str, options: &Options) -> Result<Arc<dyn Generator>, GenError> {
    Ok(match kind {
        "sub" | "lin" | "legal" => {
            options.check_known(kind, &[])?;
            match kind {
                "sub" => Arc::new(Sub),
                "lin" => Arc::new(Lin),
                _ => Arc::new(Legal),
            }
        }
        "ext" => {
            options.check_known(kind, &["values"])?;
            let values: Vec<Value> = options
                .str("values")
                .unwrap_or("")
                .split('|')
                .filter(|s| !s.is_empty())
                .map(value_of)
                .collect();
            Arc::new(Ext::new(values)?)
        }
        "samples" => {
            options.check_known(kind, &["n", "seed", "strategy", "leak"])?;
            Arc::new(Samples {
                n: options.get("n", 5)?,
                seed: options.get("seed", 0)?,
                system: OdSystem::new(options.get("strategy", 1)?, options.get("leak", 0.5)?),
            })
        }
        "eqarea" => {
            options.check_known(kind, &["mode", "system", "limit"])?;
            let mode = match options.str("mode").unwrap_or("1w") {
                "1w" => EqAreaMode::OneWitness,
                "aat" => EqAreaMode::AllAdmissible,
                m => {
                    return Err(GenError::Unavailable(format!(
                        "eqarea mode `{m}` (expected `1w` or `aat`)"
                    )))
                }
            };
            let system = match options.str("system").unwrap_or("opaque") {
                "opaque" => OpacitySystem::opaque(),
                "non-opaque" => OpacitySystem::non_opaque(),
                s => return Err(GenError::Unavailable(format!("unknown robot system `{s}`"))),
            };
            Arc::new(EqArea {
                mode,
                system,
                limit: options.get("limit", 100_000)?,
            })
        }
        _ => {
            return Err(GenError::Unavailable(format!(
                "no built-in generator `{kind}`"
            )))
        }
    })
}
