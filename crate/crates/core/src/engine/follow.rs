use crate::config::Config;
use crate::geometry::Vec3;

/// Blend factor for one step of exponential smoothing.
pub fn follow_alpha(dt: f64, time_constant: f64) -> f64 {
    1.0 - (-dt / time_constant).exp()
}

/// Anchor update for lazy-follow: a dead zone of `follow_threshold_m`
/// around the anchor, exponential approach beyond it.
pub fn lazy_follow_tick(anchor: Vec3, hand: Vec3, dt: f64, cfg: &Config) -> Vec3 {
    let offset = hand - anchor;
    if dt <= 0.0 || offset.norm() <= cfg.follow_threshold_m {
        return anchor;
    }
    anchor + offset * follow_alpha(dt, cfg.follow_time_constant_s)
}
