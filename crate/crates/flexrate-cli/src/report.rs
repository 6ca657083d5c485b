//! CSV row formatting with a fixed column order and deterministic float
//! serialization (9 significant digits, scientific notation).

use flexrate_core::rate::RateReport;

pub const CSV_HEADER: &str = "environment,scenario,d_A_m,mu,tau_ms,p,zeta,eta,xi,E_S_los,E_S_nlos,rate_aggregate_mbps,rate_time_avg_mbps,recommended_flag";

/// 9 significant digits: one leading digit plus eight decimals in
/// scientific notation. Parsing the string back reproduces the same string.
pub fn fmt_sig9(x: f64) -> String {
    format!("{x:.8e}")
}

#[derive(Debug, Clone)]
pub struct CsvRow {
    pub environment: String,
    pub scenario: String,
    pub d_a_m: f64,
    pub mu: u8,
    pub tau_ms: f64,
    pub p: f64,
    pub zeta: f64,
    pub eta: f64,
    pub xi: u64,
    pub e_s_los: f64,
    pub e_s_nlos: f64,
    pub rate_aggregate_mbps: f64,
    pub rate_time_avg_mbps: f64,
    pub recommended_flag: bool,
}

impl CsvRow {
    pub fn from_report(
        environment: &str,
        scenario: &str,
        d_a_m: f64,
        report: &RateReport,
        recommended_flag: bool,
    ) -> Self {
        CsvRow {
            environment: environment.to_string(),
            scenario: scenario.to_string(),
            d_a_m,
            mu: report.mu,
            tau_ms: report.tau.as_f64(),
            p: report.p,
            zeta: report.zeta,
            eta: report.eta,
            xi: report.xi,
            e_s_los: report.e_s_los,
            e_s_nlos: report.e_s_nlos,
            rate_aggregate_mbps: report.rate_aggregate_bps / 1e6,
            rate_time_avg_mbps: report.rate_time_avg_bps / 1e6,
            recommended_flag,
        }
    }

    pub fn to_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.environment,
            self.scenario,
            fmt_sig9(self.d_a_m),
            self.mu,
            fmt_sig9(self.tau_ms),
            fmt_sig9(self.p),
            fmt_sig9(self.zeta),
            fmt_sig9(self.eta),
            self.xi,
            fmt_sig9(self.e_s_los),
            fmt_sig9(self.e_s_nlos),
            fmt_sig9(self.rate_aggregate_mbps),
            fmt_sig9(self.rate_time_avg_mbps),
            self.recommended_flag,
        )
    }

    /// Deterministic output order: environment, scenario, distance,
    /// interval, numerology.
    pub fn sort_key(&self) -> (String, String, u64, u64, u8) {
        (
            self.environment.clone(),
            self.scenario.clone(),
            self.d_a_m.to_bits(),
            self.tau_ms.to_bits(),
            self.mu,
        )
    }
}

/// Renders header plus rows with `\n` endings, trailing newline included.
pub fn render_csv(rows: &[CsvRow]) -> String {
    let mut out = String::with_capacity(128 * (rows.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&row.to_line());
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sig9_round_trips_at_emitted_precision() {
        for &x in &[
            0.25,
            0.946_428_571_428_571_4,
            1_915.223_99,
            1.871_670_418e-1,
            0.0,
            1e8,
        ] {
            let s = fmt_sig9(x);
            let parsed: f64 = s.parse().unwrap();
            assert_eq!(fmt_sig9(parsed), s, "not stable for {x}");
        }
    }

    #[test]
    fn header_column_order_is_fixed() {
        assert!(CSV_HEADER.starts_with("environment,scenario,d_A_m,mu,tau_ms,p,zeta,eta,xi"));
        assert!(CSV_HEADER.ends_with("rate_aggregate_mbps,rate_time_avg_mbps,recommended_flag"));
    }
}
