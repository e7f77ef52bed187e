//! Bundled SNSS parameters for the generated examples.

use crate::problems::ProblemInstance;

const TABLE: &str = include_str!("snss_defaults.txt");

struct Entry {
    example: u8,
    n: usize,
    key: Key,
    alpha: f64,
    beta: f64,
}

enum Key {
    Omega(f64),
    Sigma(f64, f64),
    Any,
}

fn entries() -> impl Iterator<Item = Entry> {
    TABLE.lines().filter_map(|l| {
        let l = l.trim();
        if l.is_empty() || l.starts_with('#') {
            return None;
        }
        let f: Vec<&str> = l.split_whitespace().collect();
        let key = if let Some(w) = f[2].strip_prefix("omega=") {
            Key::Omega(w.parse().ok()?)
        } else if let Some(s) = f[2].strip_prefix("sigma=") {
            let (a, b) = s.split_once('/')?;
            Key::Sigma(a.parse().ok()?, b.parse().ok()?)
        } else {
            Key::Any
        };
        Some(Entry {
            example: f[0].parse().ok()?,
            n: f[1].parse().ok()?,
            key,
            alpha: f[3].parse().ok()?,
            beta: f[4].parse().ok()?,
        })
    })
}

fn close(a: f64, b: Option<f64>) -> bool {
    b.is_some_and(|b| (a - b).abs() <= 1e-9 * a.abs().max(1.0))
}

/// `(alpha, beta)` for SNSS on a generated example, when bundled.
pub fn snss_defaults(example: u8, p: &ProblemInstance) -> Option<(f64, f64)> {
    entries()
        .find(|e| {
            e.example == example
                && e.n == p.n
                && match e.key {
                    Key::Omega(w) => close(w, p.param("omega")),
                    Key::Sigma(s1, s2) => {
                        close(s1, p.param("sigma1")) && close(s2, p.param("sigma2"))
                    }
                    Key::Any => true,
                }
        })
        .map(|e| (e.alpha, e.beta))
}
