//! Geographic primitives shared by the world model and the dispatch service.

use thiserror::Error;

/// Mean Earth radius in meters. All spherical math in this crate uses the
/// same sphere so lane distances and responder distances stay comparable.
pub const EARTH_RADIUS_M: f64 = 6_371_000.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeoError {
    #[error("latitude {0} out of range [-90, 90] or not finite")]
    InvalidLatitude(f64),
    #[error("longitude {0} out of range [-180, 180] or not finite")]
    InvalidLongitude(f64),
}

/// A WGS-like latitude/longitude pair in degrees, validated on construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeoCoordinate {
    lat_deg: f64,
    lon_deg: f64,
}

impl GeoCoordinate {
    pub fn new(lat_deg: f64, lon_deg: f64) -> Result<Self, GeoError> {
        if !lat_deg.is_finite() || !(-90.0..=90.0).contains(&lat_deg) {
            return Err(GeoError::InvalidLatitude(lat_deg));
        }
        if !lon_deg.is_finite() || !(-180.0..=180.0).contains(&lon_deg) {
            return Err(GeoError::InvalidLongitude(lon_deg));
        }
        Ok(Self { lat_deg, lon_deg })
    }

    pub fn lat_deg(&self) -> f64 {
        self.lat_deg
    }

    pub fn lon_deg(&self) -> f64 {
        self.lon_deg
    }
}

/// Great-circle distance in meters between two coordinates (haversine form,
/// sphere of radius [`EARTH_RADIUS_M`]). Symmetric, non-negative, zero iff
/// the points coincide.
pub fn haversine_m(a: GeoCoordinate, b: GeoCoordinate) -> f64 {
    let lat_a = a.lat_deg.to_radians();
    let lat_b = b.lat_deg.to_radians();
    let dlat = (b.lat_deg - a.lat_deg).to_radians();
    let dlon = (b.lon_deg - a.lon_deg).to_radians();

    let h = (dlat / 2.0).sin().powi(2) + lat_a.cos() * lat_b.cos() * (dlon / 2.0).sin().powi(2);
    2.0 * h.sqrt().min(1.0).asin() * EARTH_RADIUS_M
}

/// Displaces `origin` by `distance_m` along a compass bearing (degrees
/// clockwise from north) using a local equirectangular approximation.
///
/// Accurate to well under a meter for the few-kilometer scales of a road
/// scenario; not meaningful at the poles, where the longitude scale
/// degenerates (the east component is dropped there).
pub fn offset_along_bearing(
    origin: GeoCoordinate,
    bearing_deg: f64,
    distance_m: f64,
) -> GeoCoordinate {
    let bearing = bearing_deg.to_radians();
    let north_m = distance_m * bearing.cos();
    let east_m = distance_m * bearing.sin();

    let dlat_deg = (north_m / EARTH_RADIUS_M).to_degrees();
    let cos_lat = origin.lat_deg.to_radians().cos();
    let dlon_deg = if cos_lat.abs() < 1e-12 {
        0.0
    } else {
        (east_m / (EARTH_RADIUS_M * cos_lat)).to_degrees()
    };

    GeoCoordinate {
        lat_deg: (origin.lat_deg + dlat_deg).clamp(-90.0, 90.0),
        lon_deg: wrap_lon(origin.lon_deg + dlon_deg),
    }
}

fn wrap_lon(lon_deg: f64) -> f64 {
    if (-180.0..=180.0).contains(&lon_deg) {
        return lon_deg;
    }
    let wrapped = (lon_deg + 180.0).rem_euclid(360.0) - 180.0;
    // rem_euclid can land exactly on -180 for inputs like 540.0; keep the
    // canonical +180 form for the upper boundary.
    if wrapped == -180.0 && lon_deg > 0.0 {
        180.0
    } else {
        wrapped
    }
}
