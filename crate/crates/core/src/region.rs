use crate::pixel::{self, PixelMap};
use crate::superpixel::SuperpixelLabeling;

/// One scalar per superpixel region.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionSaliency(Vec<f64>);

impl RegionSaliency {
    pub fn new(values: Vec<f64>) -> Self {
        Self(values)
    }

    pub fn constant(len: usize, value: f64) -> Self {
        Self(vec![value; len])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn into_values(self) -> Vec<f64> {
        self.0
    }

    pub fn get(&self, i: usize) -> f64 {
        self.0[i]
    }

    pub fn mean(&self) -> f64 {
        pixel::mean(&self.0)
    }

    pub fn normalized(mut self) -> Self {
        pixel::normalize(&mut self.0);
        self
    }

    /// Paints every pixel with the value of its region.
    pub fn render(&self, labeling: &SuperpixelLabeling) -> PixelMap {
        assert_eq!(
            self.0.len(),
            labeling.region_count(),
            "region map does not match labeling"
        );
        let data = labeling.labels().iter().map(|&l| self.0[l]).collect();
        PixelMap::new(labeling.width(), labeling.height(), data).expect("labeling dimensions")
    }
}

impl From<Vec<f64>> for RegionSaliency {
    fn from(values: Vec<f64>) -> Self {
        Self(values)
    }
}
