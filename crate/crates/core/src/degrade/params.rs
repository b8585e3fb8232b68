//! Named, overridable operator parameters.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};

pub enum ParamSlot<'a> {
    Real(&'a mut f64),
    Count(&'a mut u32),
}

/// A parameter struct whose fields can be listed by name.
pub trait ParamSet {
    fn visit(&mut self, f: &mut dyn FnMut(&'static str, ParamSlot<'_>));

    fn validate(&self) -> Result<()> {
        Ok(())
    }

    /// Current values keyed by parameter name.
    fn to_map(&self) -> BTreeMap<String, f64>
    where
        Self: Clone + Sized,
    {
        let mut copy = self.clone();
        let mut out = BTreeMap::new();
        copy.visit(&mut |name, slot| {
            let v = match slot {
                ParamSlot::Real(v) => *v,
                ParamSlot::Count(c) => *c as f64,
            };
            out.insert(name.to_string(), v);
        });
        out
    }
}

/// Applies every override whose key names a parameter of `params`,
/// recording the consumed keys in `used`.
pub fn apply_overrides<P: ParamSet + ?Sized>(
    params: &mut P,
    overrides: &BTreeMap<String, f64>,
    used: &mut BTreeSet<String>,
) -> Result<()> {
    let mut failure = None;
    params.visit(&mut |name, slot| {
        let Some(&v) = overrides.get(name) else {
            return;
        };
        used.insert(name.to_string());
        match slot {
            ParamSlot::Real(r) => {
                if v.is_finite() {
                    *r = v;
                } else {
                    failure = Some(format!("override {name} must be finite"));
                }
            }
            ParamSlot::Count(c) => {
                if v >= 0.0 && v.fract() == 0.0 && v <= u32::MAX as f64 {
                    *c = v as u32;
                } else {
                    failure = Some(format!("override {name} must be a non-negative integer, got {v}"));
                }
            }
        }
    });
    match failure {
        Some(msg) => Err(Error::InvalidArgument(msg)),
        None => Ok(()),
    }
}

pub fn reject_unused(factor: &str, overrides: &BTreeMap<String, f64>, used: &BTreeSet<String>) -> Result<()> {
    match overrides.keys().find(|k| !used.contains(*k)) {
        Some(k) => Err(Error::InvalidArgument(format!(
            "factor {factor} has no parameter `{k}`"
        ))),
        None => Ok(()),
    }
}

pub(crate) fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidArgument(msg()))
    }
}

/// Visits an RGB triple as `{prefix}_r`, `{prefix}_g`, `{prefix}_b`.
pub(crate) fn visit_rgb(
    rgb: &mut [f64; 3],
    names: [&'static str; 3],
    f: &mut dyn FnMut(&'static str, ParamSlot<'_>),
) {
    for (v, name) in rgb.iter_mut().zip(names) {
        f(name, ParamSlot::Real(v));
    }
}
