//! Parametric indoor propagation: log-distance path loss plus a fixed
//! penetration loss per obstacle traversal, RSS, thermal noise and Shannon
//! capacity. Externally computed RSS grids (ray tracing, measurements) can
//! replace the parametric ones per access point.

use std::f64::consts::LN_2;
use std::fs::File;
use std::io::Read;
use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{read_csv_grid, GridMap};
use crate::scenario::{AccessPoint, Obstacle, Point, RadioDefaults, Rect, Scenario};

/// Whether the segment `a`-`b` passes through the open interior of `rect`.
///
/// Rectangles are treated as open sets, so grazing an edge or a corner is not
/// a traversal. A zero-length segment never traverses.
pub fn segment_traverses(a: Point, b: Point, rect: &Rect) -> bool {
    let (dx, dy) = (b.x - a.x, b.y - a.y);
    if dx == 0.0 && dy == 0.0 {
        return false;
    }
    // Open parameter interval along each axis where the line is strictly inside.
    let slab = |origin: f64, delta: f64, lo: f64, hi: f64| -> Option<(f64, f64)> {
        if delta == 0.0 {
            (lo < origin && origin < hi).then_some((f64::NEG_INFINITY, f64::INFINITY))
        } else {
            let t0 = (lo - origin) / delta;
            let t1 = (hi - origin) / delta;
            Some((t0.min(t1), t0.max(t1)))
        }
    };
    let Some((tx0, tx1)) = slab(a.x, dx, rect.x0, rect.x1) else {
        return false;
    };
    let Some((ty0, ty1)) = slab(a.y, dy, rect.y0, rect.y1) else {
        return false;
    };
    let enter = tx0.max(ty0);
    let exit = tx1.min(ty1);
    enter < exit && enter < 1.0 && exit > 0.0
}

/// Traversal count per obstacle for the segment `a`-`b`.
///
/// A convex rectangle is entered at most once, so each count is 0 or 1; an
/// endpoint strictly inside counts as one traversal.
pub fn obstacle_crossings(a: Point, b: Point, obstacles: &[Obstacle]) -> Vec<u32> {
    obstacles
        .iter()
        .map(|o| u32::from(segment_traverses(a, b, &o.rect)))
        .collect()
}

fn penetration_loss_db(a: Point, b: Point, obstacles: &[Obstacle]) -> f64 {
    obstacles
        .iter()
        .filter(|o| o.penetration_loss_db > 0.0 && segment_traverses(a, b, &o.rect))
        .map(|o| o.penetration_loss_db)
        .sum()
}

/// Log-distance path loss with the distance clamped below at 1 m, plus wall
/// penetration.
pub fn path_loss_db(ap: &AccessPoint, point: Point, scenario: &Scenario) -> f64 {
    let d = ap.position.distance(point).max(1.0);
    scenario.reference_loss_db(ap)
        + 10.0 * scenario.radio.path_loss_exponent * d.log10()
        + penetration_loss_db(ap.position, point, &scenario.obstacles)
}

pub fn rss_dbm(ap: &AccessPoint, point: Point, scenario: &Scenario) -> f64 {
    ap.tx_power_dbm - path_loss_db(ap, point, scenario)
}

/// Thermal noise plus receiver noise figure over `bandwidth_hz`, in dBm.
pub fn noise_power_dbm(bandwidth_hz: f64, radio: &RadioDefaults) -> f64 {
    radio.noise_psd_dbm_hz + 10.0 * bandwidth_hz.log10() + radio.noise_figure_db
}

/// `B log2(1 + snr)` with `snr` linear.
pub fn shannon_capacity_bps(bandwidth_hz: f64, snr_linear: f64) -> f64 {
    bandwidth_hz * snr_linear.ln_1p() / LN_2
}

pub fn capacity_from_rss(rss_dbm: f64, bandwidth_hz: f64, radio: &RadioDefaults) -> f64 {
    let snr_db = rss_dbm - noise_power_dbm(bandwidth_hz, radio);
    shannon_capacity_bps(bandwidth_hz, 10f64.powf(snr_db / 10.0))
}

pub fn capacity_bps(ap: &AccessPoint, point: Point, scenario: &Scenario) -> f64 {
    capacity_from_rss(rss_dbm(ap, point, scenario), ap.bandwidth_hz, &scenario.radio)
}

/// RSS and capacity rasters for one access point.
#[derive(Debug, Clone, PartialEq)]
pub struct ApRadio {
    pub ap_id: u32,
    pub rss_dbm: GridMap,
    pub capacity_bps: GridMap,
}

/// Per-AP radio rasters, indexed like `Scenario::access_points`. All grids
/// share dimensions and mask.
#[derive(Debug, Clone, PartialEq)]
pub struct RadioGrids {
    pub cols: usize,
    pub rows: usize,
    pub pixel_size_m: f64,
    pub mask: Vec<bool>,
    pub aps: Vec<ApRadio>,
}

impl RadioGrids {
    pub fn build(scenario: &Scenario) -> Self {
        let (cols, rows) = (scenario.cols(), scenario.rows());
        let mask = scenario.pixel_mask();
        let aps = scenario
            .access_points
            .iter()
            .map(|ap| {
                let rss: Vec<f64> = (0..cols * rows)
                    .into_par_iter()
                    .map(|i| {
                        if mask[i] {
                            rss_dbm(ap, scenario.pixel_center(i / cols, i % cols), scenario)
                        } else {
                            crate::grid::MASKED
                        }
                    })
                    .collect();
                let rss = GridMap::from_fn(
                    cols,
                    rows,
                    scenario.world.pixel_size_m,
                    mask.clone(),
                    "dBm",
                    |i| rss[i],
                );
                ApRadio {
                    ap_id: ap.id,
                    capacity_bps: capacity_grid(&rss, ap, scenario),
                    rss_dbm: rss,
                }
            })
            .collect();
        Self {
            cols,
            rows,
            pixel_size_m: scenario.world.pixel_size_m,
            mask,
            aps,
        }
    }

    pub fn len(&self) -> usize {
        self.mask.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mask.is_empty()
    }

    pub fn ap(&self, ap_id: u32) -> Option<&ApRadio> {
        self.aps.iter().find(|a| a.ap_id == ap_id)
    }

    /// Replaces the RSS grid of `ap_id` with headerless CSV data in dBm and
    /// recomputes its capacity. `nan` cells at valid pixels mean no signal.
    pub fn import_rss(&mut self, reader: impl Read, ap_id: u32, scenario: &Scenario) -> Result<()> {
        let ap = scenario
            .access_point(ap_id)
            .ok_or(Error::UnknownAccessPoint(ap_id))?;
        let slot = self
            .aps
            .iter()
            .position(|a| a.ap_id == ap_id)
            .ok_or(Error::UnknownAccessPoint(ap_id))?;
        let csv = read_csv_grid(reader)?;
        if csv.cols != self.cols || csv.rows != self.rows {
            return Err(Error::DimensionMismatch {
                expected_cols: self.cols,
                expected_rows: self.rows,
                cols: csv.cols,
                rows: csv.rows,
            });
        }
        let rss = GridMap::from_fn(
            self.cols,
            self.rows,
            self.pixel_size_m,
            self.mask.clone(),
            "dBm",
            |i| csv.cells[i].unwrap_or(f64::NEG_INFINITY),
        );
        self.aps[slot] = ApRadio {
            ap_id,
            capacity_bps: capacity_grid(&rss, ap, scenario),
            rss_dbm: rss,
        };
        Ok(())
    }

    pub fn import_rss_file(
        &mut self,
        path: impl AsRef<Path>,
        ap_id: u32,
        scenario: &Scenario,
    ) -> Result<()> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        self.import_rss(file, ap_id, scenario)
    }
}

fn capacity_grid(rss: &GridMap, ap: &AccessPoint, scenario: &Scenario) -> GridMap {
    GridMap::from_fn(
        rss.cols,
        rss.rows,
        rss.pixel_size_m,
        rss.mask.clone(),
        "bit/s",
        |i| capacity_from_rss(rss.values[i], ap.bandwidth_hz, &scenario.radio),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{InferenceModel, ObstacleKind, World, SCHEMA_VERSION};

    fn rect() -> Rect {
        Rect::new(4.0, -1.0, 5.0, 1.0)
    }

    #[test]
    fn crossing_examples() {
        let p = Point::new;
        assert!(segment_traverses(p(0.0, 0.0), p(10.0, 0.0), &rect()));
        assert!(!segment_traverses(p(0.0, 5.0), p(10.0, 5.0), &rect()));
        assert!(segment_traverses(p(4.5, 0.0), p(10.0, 0.0), &rect()));
        // both endpoints inside: a single traversal
        assert!(segment_traverses(p(4.2, 0.0), p(4.8, 0.5), &rect()));
        // zero-length segment, even inside
        assert!(!segment_traverses(p(4.5, 0.0), p(4.5, 0.0), &rect()));
    }

    #[test]
    fn grazing_is_not_a_crossing() {
        let p = Point::new;
        // along the top edge
        assert!(!segment_traverses(p(0.0, 1.0), p(10.0, 1.0), &rect()));
        // through a corner only
        assert!(!segment_traverses(p(3.0, 0.0), p(5.0, 2.0), &rect()));
        // ending on the boundary from outside
        assert!(!segment_traverses(p(0.0, 0.0), p(4.0, 0.0), &rect()));
        // vertical line on the left edge
        assert!(!segment_traverses(p(4.0, -5.0), p(4.0, 5.0), &rect()));
        // vertical line through the interior
        assert!(segment_traverses(p(4.5, -5.0), p(4.5, 5.0), &rect()));
    }

    fn scenario(obstacles: Vec<Obstacle>) -> Scenario {
        Scenario {
            schema_version: SCHEMA_VERSION,
            world: World {
                width_m: 20.0,
                height_m: 20.0,
                pixel_size_m: 2.0,
            },
            obstacles,
            access_points: vec![AccessPoint {
                id: 1,
                position: Point::new(0.0, 10.0),
                tx_power_dbm: 20.0,
                carrier_freq_hz: 3.7e9,
                bandwidth_hz: 360e3,
                model_id: "m".into(),
                compute_capacity_flops: 1e12,
            }],
            models: vec![InferenceModel::new("m", 1e9, 0.9)],
            application: Default::default(),
            radio: Default::default(),
        }
        .validated()
        .unwrap()
    }

    fn wall(loss: f64) -> Obstacle {
        Obstacle {
            rect: Rect::new(5.0, 0.0, 5.5, 20.0),
            kind: ObstacleKind::Wall,
            penetration_loss_db: loss,
            blocks_service: true,
        }
    }

    #[test]
    fn path_loss_examples() {
        let s = scenario(vec![]);
        let ap = &s.access_points[0];
        let at_1m = path_loss_db(ap, Point::new(1.0, 10.0), &s);
        assert!((at_1m - 43.8).abs() < 0.1, "{at_1m}");
        let at_10m = path_loss_db(ap, Point::new(10.0, 10.0), &s);
        assert!((at_10m - at_1m - 20.0).abs() < 1e-12);
        // clamp below 1 m
        assert_eq!(path_loss_db(ap, Point::new(0.5, 10.0), &s), at_1m);

        let walled = scenario(vec![wall(10.0)]);
        let l = path_loss_db(&walled.access_points[0], Point::new(10.0, 10.0), &walled);
        assert!((l - at_10m - 10.0).abs() < 1e-12);
    }

    #[test]
    fn rss_examples() {
        let s = scenario(vec![]);
        let ap = &s.access_points[0];
        let rss = rss_dbm(ap, Point::new(1.0, 10.0), &s);
        assert!((rss - (20.0 - 43.8)).abs() < 0.1);
        assert_eq!(ap.tx_power_dbm - 80.0, -60.0);
    }

    #[test]
    fn capacity_examples() {
        let radio = RadioDefaults::default();
        assert!((shannon_capacity_bps(360e3, 1.0) - 360e3).abs() < 1e-9 * 360e3);
        let noise = noise_power_dbm(360e3, &radio);
        assert!((noise - -111.44).abs() < 0.01, "{noise}");
        let c = capacity_from_rss(-60.0, 360e3, &radio);
        assert!((c / 1e6 - 6.15).abs() < 0.01, "{c}");
        assert_eq!(capacity_from_rss(f64::NEG_INFINITY, 360e3, &radio), 0.0);
        // SNR = 0 dB
        let c0 = capacity_from_rss(noise, 360e3, &radio);
        assert!((c0 - 360e3).abs() < 1e-6, "{c0}");
    }

    #[test]
    fn grids_mask_rack_pixels() {
        let s = scenario(vec![wall(10.0)]);
        let grids = RadioGrids::build(&s);
        // wall spans x in (5, 5.5); pixel centers at x = 5 lie on its edge
        assert!(grids.mask.iter().all(|&m| m));
        let mut s = s;
        s.obstacles[0].rect = Rect::new(4.0, 0.0, 6.0, 20.0);
        let grids = RadioGrids::build(&s);
        for row in 0..grids.rows {
            assert!(!grids.mask[row * grids.cols + 2]);
            assert!(grids.aps[0].rss_dbm.values[row * grids.cols + 2].is_nan());
        }
        assert_eq!(grids.aps[0].rss_dbm.valid_count(), 90);
    }

    #[test]
    fn import_dimension_mismatch() {
        let s = scenario(vec![]);
        let mut grids = RadioGrids::build(&s);
        let row = ["-60"; 10].join(",");
        let csv = vec![row; 9].join("\n");
        assert!(matches!(
            grids.import_rss(csv.as_bytes(), 1, &s),
            Err(Error::DimensionMismatch { rows: 9, .. })
        ));
        assert!(matches!(
            grids.import_rss(csv.as_bytes(), 3, &s),
            Err(Error::UnknownAccessPoint(3))
        ));
    }
}
