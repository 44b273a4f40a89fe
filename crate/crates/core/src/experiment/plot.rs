//! gnuplot scripts for the CSVs written by [`run_experiment`](super::run_experiment).

use std::fmt::Write as _;

use crate::experiment::config::{ExperimentConfig, ModelParams};

const PREAMBLE: &str = "set datafile separator ','\nset datafile commentschars '#'\nset terminal pngcairo size 900,600\nset grid\n";

/// Script that renders every CSV of `cfg` into PNGs next to it. Paths are
/// relative to the output directory, so run gnuplot from there.
pub fn gnuplot_script(cfg: &ExperimentConfig) -> String {
    let mut s = String::from(PREAMBLE);
    let jc_plot = |s: &mut String, csv: &str, png: &str, title: &str| {
        let _ = writeln!(
            s,
            "set output '{png}'\nset title '{title}'\nset xlabel 't'\nset ylabel 'P(0, up)'\nset yrange [0:1.05]\n\
             plot '{csv}' every ::1 using 1:2 with lines title 'exact', \\\n     \
             '' every ::1 using 1:3 with points pt 6 title 'ideal qubits', \\\n     \
             '' every ::1 using 1:4 with points pt 2 title 'noisy qubits'\n"
        );
    };
    let summary_plot = |s: &mut String, csv: &str, png: &str, x: usize, xlabel: &str, first: usize| {
        let _ = writeln!(
            s,
            "set output '{png}'\nset title 'time-averaged errors'\nset xlabel '{xlabel}'\nset ylabel 'probability difference'\nset autoscale y\n\
             plot '{csv}' every ::1 using {x}:{e} with linespoints title 'dP_e', \\\n     \
             '' every ::1 using {x}:{tot} with linespoints title 'dP_tot', \\\n     \
             '' every ::1 using {x}:{a} with linespoints title 'dP_a'\n",
            e = first,
            tot = first + 1,
            a = first + 2,
        );
    };
    match &cfg.model {
        ModelParams::Dho { n_qubits, max_excitation, .. } => {
            for n in n_qubits {
                let _ = writeln!(
                    s,
                    "set output 'dho_N{n}.png'\nset title 'N = {n}'\nset xlabel 't'\nset ylabel 'P^(n)'\nset yrange [0:1.05]"
                );
                let mut parts = Vec::new();
                for k in 0..=*max_excitation {
                    let pick = |col: usize| format!("($2=={k}?${col}:1/0)");
                    let src = if parts.is_empty() { format!("'dho_N{n}.csv'") } else { "''".into() };
                    parts.push(format!("{src} every ::1 using 1:{} with lines lc {k} title 'P_b n={k}'", pick(3)));
                    parts.push(format!("'' every ::1 using 1:{} with points lc {k} pt 6 title 'P_c n={k}'", pick(4)));
                    parts.push(format!("'' every ::1 using 1:{} with points lc {k} pt 2 title 'P_q n={k}'", pick(5)));
                }
                let _ = writeln!(s, "plot {}\n", parts.join(", \\\n     "));
            }
            for k in 0..=*max_excitation {
                let _ = writeln!(
                    s,
                    "set output 'dho_summary_n{k}.png'\nset title 'n = {k}'\nset xlabel 'N'\nset ylabel 'probability difference'\nset autoscale y\n\
                     plot 'dho_summary.csv' every ::1 using 1:($2=={k}?$3:1/0) with linespoints title 'dP_e', \\\n     \
                     '' every ::1 using 1:($2=={k}?$4:1/0) with linespoints title 'dP_tot'\n"
                );
            }
        }
        ModelParams::JcTrotter { steps, .. } => {
            for k in steps {
                jc_plot(&mut s, &format!("jc_trotter_K{k}.csv"), &format!("jc_trotter_K{k}.png"), &format!("K_T = {k}"));
            }
            summary_plot(&mut s, "jc_trotter_summary.csv", "jc_trotter_summary.png", 1, "K_T", 3);
        }
        ModelParams::JcSynth { pools, .. } => {
            for pool in pools {
                let name = pool.as_str();
                jc_plot(&mut s, &format!("jc_synth_{name}.csv"), &format!("jc_synth_{name}.png"), name);
            }
        }
        ModelParams::CzBenchmark { .. } => {
            let _ = writeln!(
                s,
                "set output 'cz_benchmark.png'\nset title 'repeated CZ benchmark'\nset xlabel 'K_T'\nset ylabel 'dP_e'\n\
                 f(x) = a*x + b\nfit f(x) 'cz_benchmark.csv' every ::1 using 1:5 via a, b\n\
                 plot 'cz_benchmark.csv' every ::1 using 1:5 with points pt 5 title 'dP_e', f(x) title 'linear fit'\n"
            );
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::config::ExperimentKind;

    #[test]
    fn references_every_csv() {
        let cfg = ExperimentConfig::defaults(ExperimentKind::Dho);
        let s = gnuplot_script(&cfg);
        for n in [3, 6, 11] {
            assert!(s.contains(&format!("'dho_N{n}.csv'")));
        }
        assert!(s.contains("'dho_summary.csv'"));
        let s = gnuplot_script(&ExperimentConfig::defaults(ExperimentKind::JcTrotter));
        assert!(s.contains("'jc_trotter_K7.csv'") && s.contains("'jc_trotter_summary.csv'"));
        let s = gnuplot_script(&ExperimentConfig::defaults(ExperimentKind::JcSynth));
        assert!(s.contains("'jc_synth_six-cz.csv'") && s.contains("'jc_synth_four-cz.csv'"));
        let s = gnuplot_script(&ExperimentConfig::defaults(ExperimentKind::CzBenchmark));
        assert!(s.contains("'cz_benchmark.csv'"));
    }
}
