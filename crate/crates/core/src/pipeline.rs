//! End-to-end detection: per-scale priors, refinement, fusion, and multi-layer integration.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::affinity::{build_affinity, AffinityGraph, AffinityParams};
use crate::color::rgb_to_lab;
use crate::corner::{corner_prior, region_intensity, IntensityMode};
use crate::energy::{fuse_slp, refine};
use crate::multilayer::{integrate_multilayer, refine_map, GuidedParams, ScaleStack};
use crate::objectness::{
    pixel_objectness, propose_windows, region_objectness, ObjectnessResult, WindowCandidate,
};
use crate::pixel::{LabImage, PixelMap, RgbImage};
use crate::region::RegionSaliency;
use crate::superpixel::{extract_features, slic_segment, SuperpixelFeatures, SuperpixelLabeling};
use crate::{Error, Result};

/// Every tunable of the pipeline and the evaluation harness.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub sigma1: f64,
    pub sigma2: f64,
    pub eta: f64,
    pub scales: Vec<usize>,
    pub corner_fraction: f64,
    pub h_count: usize,
    pub beta: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub guided_radius: Option<usize>,
    pub guided_eps: f64,
    pub f_mode: IntensityMode,
    pub squared_distance: bool,
    pub literal_log_sign: bool,
    pub beta2: f64,
    pub seed: u64,
    pub compactness: f64,
    pub slic_iters: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            sigma1: 0.1,
            sigma2: 0.25,
            eta: 6.0,
            scales: vec![100, 150, 200, 250, 300],
            corner_fraction: crate::superpixel::DEFAULT_CORNER_FRACTION,
            h_count: crate::objectness::DEFAULT_WINDOW_COUNT,
            beta: crate::objectness::DEFAULT_BETA,
            guided_radius: None,
            guided_eps: crate::guided::DEFAULT_EPS,
            f_mode: IntensityMode::Const,
            squared_distance: false,
            literal_log_sign: false,
            beta2: crate::eval::DEFAULT_BETA2,
            seed: 7,
            compactness: crate::superpixel::DEFAULT_COMPACTNESS,
            slic_iters: crate::superpixel::DEFAULT_MAX_ITERS,
        }
    }
}

impl PipelineConfig {
    /// Parses a flat `key = value` file. Missing keys take defaults; unknown keys fail.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let config: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        for (name, v) in [
            ("sigma1", self.sigma1),
            ("sigma2", self.sigma2),
            ("eta", self.eta),
            ("beta", self.beta),
            ("guided_eps", self.guided_eps),
            ("beta2", self.beta2),
            ("compactness", self.compactness),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return fail(format!("{name} must be a positive finite number, got {v}"));
            }
        }
        if self.scales.is_empty() {
            return fail("scales must not be empty".into());
        }
        if self.scales.windows(2).any(|w| w[0] >= w[1]) {
            return fail(format!(
                "scales must be strictly ascending, got {:?}",
                self.scales
            ));
        }
        if !(self.corner_fraction > 0.0 && self.corner_fraction < 0.5) {
            return fail(format!(
                "corner_fraction must lie in (0, 0.5), got {}",
                self.corner_fraction
            ));
        }
        if self.h_count == 0 {
            return fail("h_count must be >= 1".into());
        }
        if self.guided_radius == Some(0) {
            return fail("guided_radius must be >= 1".into());
        }
        if self.slic_iters == 0 {
            return fail("slic_iters must be >= 1".into());
        }
        Ok(())
    }

    pub fn affinity(&self) -> AffinityParams {
        AffinityParams {
            sigma1: self.sigma1,
            sigma2: self.sigma2,
            squared_distance: self.squared_distance,
        }
    }

    pub fn guided(&self) -> GuidedParams {
        GuidedParams {
            radius: self.guided_radius,
            eps: self.guided_eps,
        }
    }
}

/// Everything computed at one superpixel scale.
#[derive(Debug, Clone)]
pub struct ScaleResult {
    pub n_target: usize,
    pub labeling: SuperpixelLabeling,
    pub features: SuperpixelFeatures,
    pub graph: AffinityGraph,
    pub cbp: RegionSaliency,
    pub windows: Vec<WindowCandidate>,
    pub objectness: ObjectnessResult,
    pub ofp: RegionSaliency,
    pub cbp_opt: RegionSaliency,
    pub ofp_opt: RegionSaliency,
    pub slp: RegionSaliency,
    pub slp_map: PixelMap,
}

#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub lab: LabImage,
    pub scales: Vec<ScaleResult>,
    pub stack: ScaleStack,
    pub mlp: PixelMap,
}

impl PipelineOutput {
    /// Mean of the per-scale maps, refined like the multi-layer map.
    pub fn mean_fusion(&self, config: &PipelineConfig) -> Result<PixelMap> {
        refine_map(&self.stack.mean_fusion(), &self.lab, &config.guided())
    }
}

/// Runs one scale: segmentation, both priors, energy refinement, and fusion.
pub fn run_scale(lab: &LabImage, n_target: usize, config: &PipelineConfig) -> Result<ScaleResult> {
    let stage = |name: &'static str| move |e: Error| e.at(n_target, name);

    let labeling = slic_segment(lab, n_target, config.compactness, config.slic_iters)
        .map_err(stage("superpixel"))?;
    let features =
        extract_features(&labeling, lab, config.corner_fraction).map_err(stage("features"))?;
    let graph = build_affinity(&features, &config.affinity()).map_err(stage("affinity"))?;

    let intensity = region_intensity(&features, config.f_mode);
    let cbp = corner_prior(&graph, &intensity).map_err(stage("corner prior"))?;

    let windows =
        propose_windows(&labeling, &features, config.h_count).map_err(stage("windows"))?;
    let objectness = pixel_objectness(&windows, &cbp.render(&labeling), config.beta)
        .map_err(stage("objectness"))?;
    let ofp = region_objectness(&objectness, &labeling).map_err(stage("objectness"))?;

    let cbp_opt = refine(&cbp, &graph, config.literal_log_sign).map_err(stage("optimize cbp"))?;
    let ofp_opt = refine(&ofp, &graph, config.literal_log_sign).map_err(stage("optimize ofp"))?;
    let slp = fuse_slp(&cbp_opt, &ofp_opt, config.eta);
    let slp_map = slp.render(&labeling);

    Ok(ScaleResult {
        n_target,
        labeling,
        features,
        graph,
        cbp,
        windows,
        objectness,
        ofp,
        cbp_opt,
        ofp_opt,
        slp,
        slp_map,
    })
}

/// Full detection. Scales run in parallel on the current rayon pool; results
/// do not depend on the pool size.
pub fn run_pipeline(img: &RgbImage, config: &PipelineConfig) -> Result<PipelineOutput> {
    config.validate()?;
    img.check_min_side()?;
    let lab = rgb_to_lab(img);
    let scales = config
        .scales
        .par_iter()
        .map(|&n| run_scale(&lab, n, config))
        .collect::<Result<Vec<_>>>()?;
    let stack = ScaleStack::new(
        config.scales.clone(),
        scales.iter().map(|s| s.slp_map.clone()).collect(),
    )?;
    let mlp = integrate_multilayer(&stack, &lab, &config.guided())?;
    Ok(PipelineOutput {
        lab,
        scales,
        stack,
        mlp,
    })
}

/// Single scale only: the rendered single-layer map, no integration or refinement.
pub fn run_single_scale(
    img: &RgbImage,
    n_target: usize,
    config: &PipelineConfig,
) -> Result<ScaleResult> {
    config.validate()?;
    img.check_min_side()?;
    run_scale(&rgb_to_lab(img), n_target, config)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_is_valid_and_round_trips() {
        let c = PipelineConfig::default();
        c.validate().unwrap();
        let text = c.to_toml_string();
        assert_eq!(PipelineConfig::from_toml_str(&text).unwrap(), c);
    }

    #[test]
    fn empty_file_means_defaults() {
        assert_eq!(
            PipelineConfig::from_toml_str("").unwrap(),
            PipelineConfig::default()
        );
    }

    #[test]
    fn partial_file_overrides() {
        let c = PipelineConfig::from_toml_str(
            "eta = 4.5\nscales = [120, 240]\nf_mode = \"luma\"\nguided_radius = 3\n",
        )
        .unwrap();
        assert_eq!(c.eta, 4.5);
        assert_eq!(c.scales, vec![120, 240]);
        assert_eq!(c.f_mode, IntensityMode::Luma);
        assert_eq!(c.guided_radius, Some(3));
        assert_eq!(
            PipelineConfig::from_toml_str(&c.to_toml_string()).unwrap(),
            c
        );
    }

    #[test]
    fn unknown_keys_and_bad_values_fail() {
        assert!(PipelineConfig::from_toml_str("sigma3 = 1.0").is_err());
        assert!(PipelineConfig::from_toml_str("sigma1 = 0.0").is_err());
        assert!(PipelineConfig::from_toml_str("scales = [200, 100]").is_err());
        assert!(PipelineConfig::from_toml_str("scales = []").is_err());
        assert!(PipelineConfig::from_toml_str("eta = -1.0").is_err());
        assert!(PipelineConfig::from_toml_str("f_mode = \"median\"").is_err());
    }

    #[test]
    fn tiny_image_is_rejected() {
        let img = RgbImage::new(4, 4, vec![0; 48]).unwrap();
        assert!(matches!(
            run_pipeline(&img, &PipelineConfig::default()),
            Err(Error::ImageTooSmall(_))
        ));
    }
}
