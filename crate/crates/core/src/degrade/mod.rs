//! The 19 degradation operators and the dispatcher that selects one from a
//! [`DegradationSpec`].

pub mod blur;
pub mod catalog;
pub mod isp;
pub mod light;
pub mod noise;
pub mod obstruction;
pub mod params;
pub mod weather;

use std::collections::{BTreeMap, BTreeSet};

pub use blur::{blur, BlurKind, BlurParams};
pub use catalog::{Cause, DegradationSpec, Factor, Severity};
pub use isp::{jpeg_cycle, no_bayer, no_demosaic, oversharpen, JpegParams, SharpenParams};
pub use light::{
    brighten_stronglight, darken_lowlight, synth_extremelight, synth_nightlight, LightCurveParams, NightParams,
    StrongLightParams,
};
pub use noise::{add_noise, NoiseKind, NoiseParams};
pub use obstruction::{lens_droplets, mud_occlusion, DropletParams, MudParams};
pub use params::ParamSet;
pub use weather::{
    fog, rain, snow, snow_mask, visibility_from_beta, FlakeSize, RainParams, ScatterParams, SnowMask, SnowParams,
};

use crate::depth::DepthMap;
use crate::error::{Error, Result};
use crate::image::ImageBuffer;
use params::{apply_overrides, reject_unused};

/// A factor with its fully resolved parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum Operator {
    LowLight(LightCurveParams),
    NightLight(NightParams),
    ExtremeLight(NightParams, LightCurveParams),
    StrongLight(StrongLightParams),
    Rain(RainParams),
    Fog(ScatterParams),
    Snow(SnowParams, FlakeSize),
    Mud(MudParams),
    Droplets(DropletParams),
    Jpeg(JpegParams),
    Oversharpen(SharpenParams),
    NoDemosaic,
    NoBayer,
    Noise(NoiseParams),
    Blur(BlurParams),
}

impl Operator {
    /// Severity defaults for `factor` with `overrides` applied. Keys that name
    /// no parameter of the factor are rejected.
    pub fn resolve(factor: Factor, severity: Severity, overrides: &BTreeMap<String, f64>) -> Result<Self> {
        let mut used = BTreeSet::new();
        let mut op = match factor {
            Factor::LowLight => Operator::LowLight(LightCurveParams::for_severity(severity)),
            Factor::NightLight => Operator::NightLight(NightParams::for_severity(severity)),
            Factor::ExtremeLight => Operator::ExtremeLight(
                NightParams::for_severity(severity),
                LightCurveParams::for_severity(severity),
            ),
            Factor::StrongLight => Operator::StrongLight(StrongLightParams::for_severity(severity)),
            Factor::Rain => Operator::Rain(RainParams::for_severity(severity)),
            Factor::Fog => Operator::Fog(ScatterParams::fog(severity)),
            Factor::Snow => Operator::Snow(
                SnowParams::for_severity(severity),
                weather::SnowMaskParams::size_class(severity),
            ),
            Factor::Mud => Operator::Mud(MudParams::for_severity(severity)),
            Factor::Droplets => Operator::Droplets(DropletParams::for_severity(severity)),
            Factor::Jpeg => Operator::Jpeg(JpegParams::for_severity(severity)),
            Factor::Oversharpen => Operator::Oversharpen(SharpenParams::for_severity(severity)),
            Factor::NoDemosaic => Operator::NoDemosaic,
            Factor::NoBayer => Operator::NoBayer,
            Factor::Gaussian => Operator::Noise(NoiseParams::for_severity(NoiseKind::Gaussian, severity)),
            Factor::Uniform => Operator::Noise(NoiseParams::for_severity(NoiseKind::Uniform, severity)),
            Factor::Impulse => Operator::Noise(NoiseParams::for_severity(NoiseKind::Impulse, severity)),
            Factor::Poisson => Operator::Noise(NoiseParams::for_severity(NoiseKind::Poisson, severity)),
            Factor::Defocus => Operator::Blur(BlurParams::for_severity(BlurKind::Defocus, severity)),
            Factor::Motion => Operator::Blur(BlurParams::for_severity(BlurKind::Motion, severity)),
        };
        op.for_each_set(|p| apply_overrides(p, overrides, &mut used))?;
        reject_unused(factor.name(), overrides, &used)?;
        op.for_each_set(|p| p.validate())?;
        Ok(op)
    }

    fn for_each_set(&mut self, mut f: impl FnMut(&mut dyn ParamSet) -> Result<()>) -> Result<()> {
        match self {
            Operator::LowLight(p) => f(p),
            Operator::NightLight(p) => f(p),
            Operator::ExtremeLight(n, c) => {
                f(n)?;
                f(c)
            }
            Operator::StrongLight(p) => f(p),
            Operator::Rain(p) => f(p),
            Operator::Fog(p) => f(p),
            Operator::Snow(p, _) => f(p),
            Operator::Mud(p) => f(p),
            Operator::Droplets(p) => f(p),
            Operator::Jpeg(p) => f(p),
            Operator::Oversharpen(p) => f(p),
            Operator::NoDemosaic | Operator::NoBayer => Ok(()),
            Operator::Noise(p) => f(p),
            Operator::Blur(p) => f(p),
        }
    }

    /// Resolved parameter values keyed by name.
    pub fn params(&self) -> BTreeMap<String, f64> {
        let mut out = BTreeMap::new();
        let mut copy = self.clone();
        let _ = copy.for_each_set(|p| {
            p.visit(&mut |name, slot| {
                let v = match slot {
                    params::ParamSlot::Real(v) => *v,
                    params::ParamSlot::Count(c) => *c as f64,
                };
                out.insert(name.to_string(), v);
            });
            Ok(())
        });
        out
    }

    pub fn apply(&self, img: &ImageBuffer, depth: Option<&DepthMap>, seed: u64) -> Result<ImageBuffer> {
        let need = |name: &'static str| depth.ok_or(Error::MissingDepth(name));
        match self {
            Operator::LowLight(p) => light::darken_with(img, p),
            Operator::NightLight(p) => light::night_with(img, p, seed),
            Operator::ExtremeLight(n, c) => light::extreme_with(img, n, c, seed),
            Operator::StrongLight(p) => light::strong_light_with(img, p),
            Operator::Rain(p) => weather::rain_with(img, need("rain")?, p, seed),
            Operator::Fog(p) => weather::scatter(img, need("fog")?, p),
            Operator::Snow(p, size) => weather::snow_with(img, need("snow")?, p, *size, seed),
            Operator::Mud(p) => obstruction::mud_with(img, p, seed),
            Operator::Droplets(p) => obstruction::droplets_with(img, p, seed),
            Operator::Jpeg(p) => isp::jpeg_with(img, p),
            Operator::Oversharpen(p) => isp::sharpen_with(img, p),
            Operator::NoDemosaic => no_demosaic(img),
            Operator::NoBayer => no_bayer(img),
            Operator::Noise(p) => noise::noise_with(img, p, seed),
            Operator::Blur(p) => blur::blur_with(img, p, seed),
        }
    }
}

/// Applies the factor selected by `spec`, using `spec.seed` as the operator
/// seed. Weather factors require `depth`.
pub fn apply_degradation(img: &ImageBuffer, depth: Option<&DepthMap>, spec: &DegradationSpec) -> Result<ImageBuffer> {
    if spec.factor.needs_depth() && depth.is_none() {
        return Err(Error::MissingDepth(spec.factor.name()));
    }
    Operator::resolve(spec.factor, spec.severity, &spec.overrides)?.apply(img, depth, spec.seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scene() -> ImageBuffer {
        ImageBuffer::from_fn(48, 32, 3, |x, y, c| {
            (0.5 + 0.35 * ((x as f64 * 0.4 + c as f64).sin() * (y as f64 * 0.25).cos())).clamp(0.0, 1.0)
        })
    }

    #[test]
    fn fog_spec_matches_direct_call() {
        let img = scene();
        let depth = DepthMap::from_fn(48, 32, |_, y| 5.0 + 10.0 * y as f64).unwrap();
        let spec = DegradationSpec::new(Factor::Fog, Severity::new(2).unwrap(), 3);
        let out = apply_degradation(&img, Some(&depth), &spec).unwrap();
        let direct = weather::scatter(
            &img,
            &depth,
            &ScatterParams {
                beta: 0.01,
                airlight: [0.9; 3],
            },
        )
        .unwrap();
        assert_eq!(out, direct);
    }

    #[test]
    fn every_factor_is_deterministic_and_in_range() {
        let img = scene();
        let depth = DepthMap::from_fn(48, 32, |_, y| if y < 8 { f64::INFINITY } else { 3.0 + y as f64 }).unwrap();
        for factor in Factor::ALL {
            for s in Severity::ALL {
                let spec = DegradationSpec::new(factor, s, 99);
                let a = apply_degradation(&img, Some(&depth), &spec).unwrap();
                let b = apply_degradation(&img, Some(&depth), &spec).unwrap();
                assert_eq!(a, b, "{factor}");
                assert_eq!((a.width(), a.height(), a.channels()), (48, 32, 3));
                assert!(a.data().iter().all(|v| (0.0..=1.0).contains(v)), "{factor}");
            }
        }
    }

    #[test]
    fn weather_without_depth_fails() {
        for f in [Factor::Fog, Factor::Rain, Factor::Snow] {
            let spec = DegradationSpec::new(f, Severity::new(1).unwrap(), 0);
            assert!(matches!(apply_degradation(&scene(), None, &spec), Err(Error::MissingDepth(_))));
        }
    }

    #[test]
    fn overrides_are_checked() {
        let s = Severity::new(1).unwrap();
        let op = Operator::resolve(Factor::Fog, s, &BTreeMap::from([("beta".to_string(), 0.0)])).unwrap();
        assert_eq!(op.params()["beta"], 0.0);
        assert!(Operator::resolve(Factor::Fog, s, &BTreeMap::from([("alpha".to_string(), 0.1)])).is_err());
        assert!(Operator::resolve(Factor::Oversharpen, s, &BTreeMap::from([("alpha".to_string(), 2.0)])).is_err());
        assert!(Operator::resolve(Factor::NoBayer, s, &BTreeMap::from([("x".to_string(), 1.0)])).is_err());
    }

    #[test]
    fn zero_parameters_give_identity() {
        let img = scene();
        let depth = DepthMap::constant(48, 32, 20.0).unwrap();
        let s = Severity::new(3).unwrap();
        let cases = [
            (Factor::Fog, vec![("beta", 0.0)]),
            (Factor::Rain, vec![("rate", 0.0)]),
            (Factor::Oversharpen, vec![("alpha", 0.0)]),
        ];
        for (factor, ov) in cases {
            let mut spec = DegradationSpec::new(factor, s, 1);
            for (k, v) in ov {
                spec = spec.with_override(k, v);
            }
            assert_eq!(apply_degradation(&img, Some(&depth), &spec).unwrap(), img, "{factor}");
        }
    }

    #[test]
    fn unknown_factor_name() {
        assert!(matches!("hail".parse::<Factor>(), Err(Error::UnknownFactor(_))));
    }
}
