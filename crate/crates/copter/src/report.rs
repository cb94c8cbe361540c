//! Rendering a [`SimReport`] as CSV or as a plain-text table.

use std::fmt::Write;

use crate::experiment::{Comparison, SimReport};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Table,
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.2}")).unwrap_or_default()
}

fn rows(r: &SimReport) -> [(&'static str, &'static str, &Comparison); 2] {
    [("fuel_l", "Fuel (l)", &r.fuel_l), ("delay_hr", "Delay (h)", &r.delay_hr)]
}

pub fn render(report: &SimReport, format: Format) -> String {
    match format {
        Format::Csv => csv(report),
        Format::Table => table(report),
    }
}

fn csv(r: &SimReport) -> String {
    let mut out = String::from("metric,baseline,influence,change_pct,difference,ci_low,ci_high\n");
    for (key, _, c) in rows(r) {
        writeln!(
            out,
            "{key},{:.4},{:.4},{},{:.4},{:.4},{:.4}",
            c.baseline_mean,
            c.influence_mean,
            opt(c.change_pct),
            c.difference,
            c.ci_low,
            c.ci_high
        )
        .unwrap();
    }
    out.push_str("\nmode,share_pct\n");
    for m in &r.mode_share {
        writeln!(out, "{},{:.2}", m.mode, m.share_pct).unwrap();
    }
    out
}

fn table(r: &SimReport) -> String {
    let mut out = String::new();
    writeln!(
        out,
        "{} travelers, {} influenced, {} trials per condition (seeds: population {}, influence {}, trials {})\n",
        r.travelers,
        r.influenced,
        r.baseline.len(),
        r.seeds.population,
        r.seeds.influence,
        r.seeds.trials
    )
    .unwrap();
    writeln!(out, "Energy and delay, influence vs baseline (95% CI of baseline - influence)").unwrap();
    writeln!(out, "{:<10} {:>14} {:>14} {:>9} {:>14} {:>14}", "", "Baseline", "Influence", "Change %", "CI low", "CI high")
        .unwrap();
    for (_, label, c) in rows(r) {
        writeln!(
            out,
            "{label:<10} {:>14.2} {:>14.2} {:>9} {:>14.2} {:>14.2}",
            c.baseline_mean,
            c.influence_mean,
            opt(c.change_pct),
            c.ci_low,
            c.ci_high
        )
        .unwrap();
    }
    writeln!(out, "\nShare of influenced travelers using each mode (%; adoption {:.2}%)", r.adoption_pct).unwrap();
    for m in &r.mode_share {
        writeln!(out, "{:<10} {:>8.2}", m.mode, m.share_pct).unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::summarize;
    use crate::scenario::Seeds;
    use copter_core::sim::TrialResult;

    fn report() -> SimReport {
        let t = |fuel: f64, walk: usize| TrialResult {
            total_fuel_l: fuel,
            total_delay_hr: 1.0,
            influenced: 10,
            adopted: walk,
            no_alternative: 0,
            mode_counts: [walk, 0, 0, 0, 10 - walk, 0, 0],
        };
        summarize(
            Seeds { population: 1, influence: 2, trials: 3 },
            vec![1, 2],
            100,
            10,
            vec![t(10.0, 0), t(10.0, 0)],
            vec![t(8.0, 2), t(8.0, 2)],
        )
        .unwrap()
    }

    #[test]
    fn csv_sections() {
        let s = render(&report(), Format::Csv);
        let mut parts = s.split("\n\n");
        let energy = parts.next().unwrap();
        assert_eq!(energy.lines().nth(1).unwrap(), "fuel_l,10.0000,8.0000,-20.00,2.0000,2.0000,2.0000");
        assert_eq!(energy.lines().nth(2).unwrap(), "delay_hr,1.0000,1.0000,0.00,0.0000,0.0000,0.0000");
        let modes = parts.next().unwrap();
        assert!(modes.lines().any(|l| l == "drive,80.00"));
        assert!(modes.lines().any(|l| l == "walk,20.00"));
    }

    #[test]
    fn table_mentions_both_sections() {
        let s = render(&report(), Format::Table);
        assert!(s.contains("Fuel (l)") && s.contains("-20.00") && s.contains("drive"));
    }
}
