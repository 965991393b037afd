//! Synthetic hourly rental records with the public bike-sharing schema.
//!
//! Stands in for the real file in tests and demos: one date column, the
//! rental count target, nine numeric weather/time columns and three
//! categorical columns. Counts follow commuter peaks, temperature and rain,
//! and are zero on non-functioning days.

use std::f64::consts::PI;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const TARGET_COLUMN: &str = "Rented Bike Count";

pub const COLUMNS: [&str; 14] = [
    "Date",
    TARGET_COLUMN,
    "Hour",
    "Temperature(C)",
    "Humidity(%)",
    "Wind speed (m/s)",
    "Visibility (10m)",
    "Dew point temperature(C)",
    "Solar Radiation (MJ/m2)",
    "Rainfall(mm)",
    "Snowfall (cm)",
    "Seasons",
    "Holiday",
    "Functioning Day",
];

/// One year of hourly rows.
pub const YEAR_ROWS: usize = 8760;

const DAYS_PER_MONTH: [u32; 12] = [31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31];

/// CSV text with `rows` hourly records starting 01/12/2017.
pub fn bike_csv(rows: usize, seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = COLUMNS.join(",");
    out.push('\n');
    let (mut day, mut month, mut year) = (1u32, 12usize, 2017u32);
    let mut off_day = false;
    for i in 0..rows {
        let hour = i % 24;
        if hour == 0 {
            if i > 0 {
                day += 1;
                if day > DAYS_PER_MONTH[month - 1] {
                    day = 1;
                    month = month % 12 + 1;
                    if month == 1 {
                        year += 1;
                    }
                }
            }
            off_day = rng.gen_bool(0.03);
        }
        let season = match month {
            12 | 1 | 2 => "Winter",
            3..=5 => "Spring",
            6..=8 => "Summer",
            _ => "Autumn",
        };
        let day_of_year = i as f64 / 24.0;
        let temperature = 12.0 - 15.0 * (2.0 * PI * day_of_year / 365.0).cos()
            + 5.0 * (2.0 * PI * (hour as f64 - 9.0) / 24.0).sin()
            + rng.gen_range(-3.0..3.0);
        let humidity: i64 = rng.gen_range(20..98);
        let wind = (rng.gen_range(0.0..4.0f64) * 10.0).round() / 10.0;
        let visibility: i64 = rng.gen_range(30..2000);
        let dew = temperature - (100.0 - humidity as f64) / 5.0;
        let solar = if (7..19).contains(&hour) {
            ((PI * (hour as f64 - 7.0) / 12.0).sin() * 3.0 * rng.gen_range(0.2..1.0f64) * 100.0).round() / 100.0
        } else {
            0.0
        };
        let rain = if rng.gen_bool(0.06) { (rng.gen_range(0.1..8.0f64) * 10.0).round() / 10.0 } else { 0.0 };
        let snow = if temperature < 0.0 && rng.gen_bool(0.05) { (rng.gen_range(0.1..4.0f64) * 10.0).round() / 10.0 } else { 0.0 };
        let holiday = if rng.gen_bool(0.05) { "Holiday" } else { "No Holiday" };
        let peak = (-((hour as f64 - 8.0).powi(2)) / 2.0).exp() + 1.4 * (-((hour as f64 - 18.0).powi(2)) / 4.0).exp();
        let mut count = 150.0 + 900.0 * peak + 25.0 * temperature.max(-5.0) - 120.0 * rain - 2.0 * humidity as f64
            + rng.gen_range(-80.0..80.0);
        if holiday == "Holiday" {
            count *= 0.7;
        }
        let count = if off_day { 0 } else { count.max(0.0).round() as i64 };
        let _ = writeln!(
            out,
            "{day:02}/{month:02}/{year},{count},{hour},{temperature:.1},{humidity},{wind:.1},{visibility},{dew:.1},{solar:.2},{rain:.1},{snow:.1},{season},{holiday},{}",
            if off_day { "No" } else { "Yes" }
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schema_and_size() {
        let text = bike_csv(YEAR_ROWS, 1);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), YEAR_ROWS + 1);
        assert!(lines.iter().all(|l| l.split(',').count() == COLUMNS.len()));
        assert!(lines[1].starts_with("01/12/2017,"));
        assert!(lines[YEAR_ROWS].starts_with("30/11/2018,"));
        assert_eq!(bike_csv(50, 1), bike_csv(50, 1));
    }
}
