//! Seeded synthetic scenes with exact ground truth: a textured static
//! background, square objects and additive Gaussian sensor noise.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::postprocess::Mask;

/// How an object moves through the scene.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Motion {
    /// Bounces off the image border at `speed` pixels per frame along both axes.
    Bounce { x0: f64, y0: f64, speed: f64 },
    /// Sits at `(x, y)` for frames in `from..until`.
    Stationary {
        x: usize,
        y: usize,
        from: usize,
        until: usize,
    },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SceneObject {
    pub size: usize,
    /// Intensity offset in background standard deviations.
    pub contrast: f64,
    pub motion: Motion,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Scene {
    pub width: usize,
    pub height: usize,
    pub background_mean: f64,
    pub background_sd: f64,
    /// Sensor noise standard deviation in intensity units.
    pub noise_sd: f64,
    pub objects: Vec<SceneObject>,
    pub seed: u64,
}

impl Scene {
    /// Textured background with a single 20×20 square bouncing at 3 px/frame,
    /// 3 background standard deviations brighter than the mean.
    pub fn moving_square(width: usize, height: usize, seed: u64) -> Self {
        Self {
            width,
            height,
            background_mean: 110.0,
            background_sd: 25.0,
            noise_sd: 2.0,
            objects: vec![SceneObject {
                size: 20,
                contrast: 3.0,
                motion: Motion::Bounce {
                    x0: width as f64 / 5.0,
                    y0: height as f64 / 3.0,
                    speed: 3.0,
                },
            }],
            seed,
        }
    }

    pub fn generator(&self) -> SceneGenerator {
        SceneGenerator::new(self.clone())
    }
}

/// Renders frames of a [`Scene`]. Frame `t` depends only on the scene and
/// `t`, so frames may be rendered in any order.
pub struct SceneGenerator {
    scene: Scene,
    background: Vec<f64>,
    noise: Normal<f64>,
}

fn bounce(start: f64, speed: f64, t: usize, span: f64) -> f64 {
    if span <= 0.0 {
        return 0.0;
    }
    let p = (start + speed * t as f64).rem_euclid(2.0 * span);
    if p <= span {
        p
    } else {
        2.0 * span - p
    }
}

impl SceneGenerator {
    pub fn new(scene: Scene) -> Self {
        let (w, h) = (scene.width, scene.height);
        let mut rng = ChaCha8Rng::seed_from_u64(scene.seed);
        let waves: Vec<(f64, f64, f64, f64)> = (0..4)
            .map(|_| {
                (
                    rng.random_range(0.02..0.15),
                    rng.random_range(0.02..0.15),
                    rng.random_range(0.0..std::f64::consts::TAU),
                    rng.random_range(0.5..1.0),
                )
            })
            .collect();
        let mut raw: Vec<f64> = (0..w * h)
            .map(|i| {
                let (x, y) = ((i % w) as f64, (i / w) as f64);
                let smooth: f64 = waves
                    .iter()
                    .map(|&(fx, fy, ph, a)| a * (fx * x + fy * y + ph).sin())
                    .sum();
                smooth + 0.3 * rng.random_range(-1.0..1.0)
            })
            .collect();
        // Rescale to the requested mean and standard deviation.
        let n = raw.len() as f64;
        let mean = raw.iter().sum::<f64>() / n;
        let sd = (raw.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
        for v in &mut raw {
            *v = scene.background_mean + scene.background_sd * (*v - mean) / sd;
        }
        let noise = Normal::new(0.0, scene.noise_sd.max(0.0)).expect("finite noise level");
        Self {
            scene,
            background: raw,
            noise,
        }
    }

    pub fn scene(&self) -> &Scene {
        &self.scene
    }

    /// Noise-free background.
    pub fn background(&self) -> &[f64] {
        &self.background
    }

    /// Top-left corner of each visible object at frame `t`.
    pub fn object_positions(&self, t: usize) -> Vec<(usize, usize, &SceneObject)> {
        let (w, h) = (self.scene.width, self.scene.height);
        self.scene
            .objects
            .iter()
            .filter_map(|o| match o.motion {
                Motion::Bounce { x0, y0, speed } => {
                    let x = bounce(x0, speed, t, w.saturating_sub(o.size) as f64);
                    let y = bounce(y0, speed * 0.7, t, h.saturating_sub(o.size) as f64);
                    Some((x.round() as usize, y.round() as usize, o))
                }
                Motion::Stationary { x, y, from, until } => {
                    (from..until).contains(&t).then_some((x, y, o))
                }
            })
            .collect()
    }

    /// Exact foreground support at frame `t`.
    pub fn ground_truth(&self, t: usize) -> Mask {
        let (w, h) = (self.scene.width, self.scene.height);
        let mut m = Mask::new(w, h);
        for (x, y, o) in self.object_positions(t) {
            for yy in y..(y + o.size).min(h) {
                for xx in x..(x + o.size).min(w) {
                    m.set(xx, yy, true);
                }
            }
        }
        m
    }

    /// Raw intensities of frame `t`.
    pub fn frame(&self, t: usize) -> Vec<f64> {
        let (w, h) = (self.scene.width, self.scene.height);
        let mut img = self.background.clone();
        for (x, y, o) in self.object_positions(t) {
            let value = self.scene.background_mean + o.contrast * self.scene.background_sd;
            for yy in y..(y + o.size).min(h) {
                img[yy * w + x..yy * w + (x + o.size).min(w)].fill(value);
            }
        }
        if self.scene.noise_sd > 0.0 {
            let mut rng =
                ChaCha8Rng::seed_from_u64(self.scene.seed ^ (t as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
            for v in &mut img {
                *v += self.noise.sample(&mut rng);
            }
        }
        img
    }
}
