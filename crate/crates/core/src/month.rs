//! Calendar-month indexing. Month 0 is 1800-01; earlier dates are negative.

const EPOCH_YEAR: i32 = 1800;

/// Parses `YYYY-MM` or `YYYY-MM-DD` into a month index. The day, if present,
/// is validated and then dropped.
pub fn parse_month(s: &str) -> Result<i32, String> {
    let s = s.trim();
    let mut parts = s.split('-');
    let (year, month) = match (parts.next(), parts.next()) {
        (Some(y), Some(m)) => (y, m),
        _ => return Err(format!("expected YYYY-MM or YYYY-MM-DD, got `{s}`")),
    };
    let day = parts.next();
    if parts.next().is_some() {
        return Err(format!("expected YYYY-MM or YYYY-MM-DD, got `{s}`"));
    }
    let year: i32 = parse_digits(year, 4).ok_or_else(|| format!("bad year in `{s}`"))?;
    let month: i32 = parse_digits(month, 2).ok_or_else(|| format!("bad month in `{s}`"))?;
    if !(1..=12).contains(&month) {
        return Err(format!("month out of range in `{s}`"));
    }
    if let Some(day) = day {
        let day: i32 = parse_digits(day, 2).ok_or_else(|| format!("bad day in `{s}`"))?;
        if !(1..=31).contains(&day) {
            return Err(format!("day out of range in `{s}`"));
        }
    }
    Ok((year - EPOCH_YEAR) * 12 + (month - 1))
}

fn parse_digits(s: &str, width: usize) -> Option<i32> {
    if s.len() != width || !s.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    s.parse().ok()
}

/// Formats a month index as `YYYY-MM`.
pub fn format_month(m: i32) -> String {
    let year = EPOCH_YEAR + m.div_euclid(12);
    let month = m.rem_euclid(12) + 1;
    format!("{year:04}-{month:02}")
}
