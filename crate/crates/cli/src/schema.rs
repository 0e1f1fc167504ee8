//! Text for `list-catalog` and `print-config-schema`.

use std::fmt::Write;

use anderson_clt::functions::catalog::catalog;
use anderson_clt::functions::Validity;

use crate::config::KINDS;

pub const CONFIG_SCHEMA: &str = r#"# Experiment config (TOML). Unknown keys are rejected.
# Fields marked with kinds are required by those kinds and ignored otherwise.

kind = "clt"            # required; one of the kinds listed by `list-catalog`
d = 1                   # lattice dimension, default 1
L = 500                 # cube half-side; the cube has (2L+1)^d sites (at most 5000)
# L_grid = [50, 100]    # instead of L for clt, variance-scan, hf-check, ids

# Single-site distribution, default two_point(+1, -1, 1/2):
ssd = { kind = "two_point", a = 1.0, b = -1.0, prob_a = 0.5 }
# ssd = { kind = "uniform", lo = -1.0, hi = 1.0 }
# ssd = { kind = "gaussian", mean = 0.0, std = 1.0 }

function = "arctan"     # catalog name, or { polynomial = [c0, c1, c2, ...] }
R = 2000                # replicates: clt (≥ 200), variance-scan and approx-convergence (≥ 8), nubar (≥ 2)

# p = 1                 # modified-measure order for nubar (default 1)
# p_grid = [0, 1]       # moments: orders of ν̄_p reported next to the DOS moments (default none)
# k = 4                 # moment order: moments, nubar, ids
# k_grid = [0, 1, 2]    # instead of k; (2d+1)^max(k) must stay within 7^8
# degrees = [4, 8, 16]  # approx-convergence: strictly ascending polynomial degrees
# interval = [-3.0, 3.0]  # approx-convergence: approximation interval, default the hull of the
                          # almost-sure spectrum; clt: open positivity interval, which must
                          # strictly contain that hull (default: the hull widened by 1)
# scheme = "bernstein"  # approx-convergence: "bernstein" (default) or "chebyshev"
# norm_replicates = 1000  # replicates of the ∫|f′|² dν̄ estimate; approx-convergence defaults to R,
                          # clt computes the variance bound only when set
# norm_sites = 4        # sites sampled per norm replicate (default: all sites)
# instances = 100       # hf-check: number of random instances (default 100)
# step = 1e-4           # hf-check: finite-difference step (default 1e-4)

master_seed = 0         # default 0. Determinism contract: every random draw is a pure
                        # function of (master_seed, replicate, purpose, lattice site), so an
                        # identical config reproduces the CSV byte for byte for any worker count.
workers = 0             # worker threads, 0 = all cores; affects scheduling only
# output = "clt_L500"   # file stem under --out (default: the kind name)
assert = false          # exit 1 when any verdict fails (same as --assert)
"#;

pub fn catalog_listing() -> String {
    let mut out = String::from("test functions:\n");
    let _ = writeln!(out, "  {:<10} {:<9} {:<16} growth bound |f′| ≤", "name", "monotone", "validity");
    for f in catalog() {
        let validity = match f.validity() {
            Validity::Global => "global".to_string(),
            Validity::Interval(a, b) => format!("[{a}, {b}]"),
        };
        let _ = writeln!(out, "  {:<10} {:<9} {:<16} {}", f.label(), f.is_monotone(), validity, f.growth());
    }
    out.push_str("  polynomials: function = { polynomial = [c0, c1, ...] }\n\nsingle-site distributions:\n");
    for (kind, fields, note) in [
        ("two_point", "a, b, prob_a", "exact rational moments; enables enumeration"),
        ("uniform", "lo, hi", "exact rational moments"),
        ("gaussian", "mean, std", "floating-point moments; unbounded support"),
    ] {
        let _ = writeln!(out, "  {kind:<10} {fields:<14} {note}");
    }
    out.push_str("\nexperiment kinds:\n");
    for (name, _, about) in KINDS {
        let _ = writeln!(out, "  {name:<19} {about}");
    }
    out
}
