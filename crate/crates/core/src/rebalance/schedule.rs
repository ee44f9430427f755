use crate::time::{TimeWindow, Timestamp};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PassKind {
    /// 11:00, resets after the morning rush.
    Midday,
    /// 19:00, resets after the evening rush.
    Evening,
    /// 03:00 the next day, prepares for the morning rush.
    Overnight,
}

impl PassKind {
    pub fn name(self) -> &'static str {
        match self {
            PassKind::Midday => "midday",
            PassKind::Evening => "evening",
            PassKind::Overnight => "overnight",
        }
    }

    /// Hour window whose flows classify stations for this pass.
    pub fn window(self) -> TimeWindow {
        match self {
            PassKind::Midday => TimeWindow::MORNING,
            PassKind::Evening => TimeWindow::EVENING,
            PassKind::Overnight => TimeWindow::FULL_DAY,
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "midday" | "11" | "11:00" => Some(PassKind::Midday),
            "evening" | "19" | "19:00" => Some(PassKind::Evening),
            "overnight" | "3" | "03" | "03:00" => Some(PassKind::Overnight),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pass {
    pub kind: PassKind,
    pub at: Timestamp,
    pub window: TimeWindow,
}

/// The three daily truck passes for the day with index `day`.
pub fn schedule_passes(day: i64) -> [Pass; 3] {
    let pass = |kind: PassKind, day: i64, hour: i64| Pass {
        kind,
        at: Timestamp::from_day_and_seconds(day, hour * 3600),
        window: kind.window(),
    };
    [
        pass(PassKind::Midday, day, 11),
        pass(PassKind::Evening, day, 19),
        pass(PassKind::Overnight, day + 1, 3),
    ]
}
