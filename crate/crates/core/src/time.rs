//! Naive wall-clock timestamps and hour windows.
//!
//! Timestamps count seconds since 1970-01-01T00:00:00 in whatever clock the
//! trip export uses; day and hour arithmetic never consults a time zone.

pub const SECONDS_PER_DAY: i64 = 86_400;

/// Seconds since the epoch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Timestamp(pub i64);

impl Timestamp {
    pub fn from_day_and_seconds(day: i64, seconds: i64) -> Self {
        Timestamp(day * SECONDS_PER_DAY + seconds)
    }

    /// Calendar day index since the epoch.
    pub fn day(self) -> i64 {
        self.0.div_euclid(SECONDS_PER_DAY)
    }

    /// Hour of day, 0..=23.
    pub fn hour(self) -> usize {
        (self.0.rem_euclid(SECONDS_PER_DAY) / 3600) as usize
    }
}

/// A half-open range of hours `[start_hour, end_hour)` within one day.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TimeWindow {
    pub start_hour: u8,
    pub end_hour: u8,
}

impl TimeWindow {
    pub const MORNING: TimeWindow = TimeWindow { start_hour: 6, end_hour: 11 };
    pub const EVENING: TimeWindow = TimeWindow { start_hour: 15, end_hour: 19 };
    pub const FULL_DAY: TimeWindow = TimeWindow { start_hour: 0, end_hour: 24 };

    pub fn contains_hour(&self, hour: usize) -> bool {
        hour >= self.start_hour as usize && hour < self.end_hour as usize
    }

    pub fn hours(&self) -> core::ops::Range<usize> {
        self.start_hour as usize..(self.end_hour as usize).min(24)
    }

    pub fn name(&self) -> &'static str {
        match *self {
            TimeWindow::MORNING => "morning",
            TimeWindow::EVENING => "evening",
            TimeWindow::FULL_DAY => "full_day",
            _ => "custom",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "morning" => Some(TimeWindow::MORNING),
            "evening" => Some(TimeWindow::EVENING),
            "full_day" | "full-day" => Some(TimeWindow::FULL_DAY),
            other => {
                let (a, b) = other.split_once('-')?;
                let start_hour: u8 = a.trim().parse().ok()?;
                let end_hour: u8 = b.trim().parse().ok()?;
                (start_hour < end_hour && end_hour <= 24)
                    .then_some(TimeWindow { start_hour, end_hour })
            }
        }
    }
}

/// Converts a proleptic Gregorian date into a day index since the epoch.
pub fn days_from_civil(year: i64, month: u32, day: u32) -> i64 {
    let y = if month <= 2 { year - 1 } else { year };
    let era = y.div_euclid(400);
    let yoe = y - era * 400;
    let m = month as i64;
    let doy = (153 * (if m > 2 { m - 3 } else { m + 9 }) + 2) / 5 + day as i64 - 1;
    let doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    era * 146_097 + doe - 719_468
}
