//! Brute-force reference computations for tests.
//!
//! Nothing here depends on the engine: inputs are plain rows and string
//! sets, and every statistic is recomputed with naive loops over all rows.

use std::collections::{BTreeMap, BTreeSet};

/// One respondent, engine-independent.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub community: String,
    pub year: u16,
    pub metrics: Vec<Option<f64>>,
}

fn in_scope(row: &Row, members: &BTreeSet<String>, year: Option<u16>) -> bool {
    members.contains(&row.community) && year.is_none_or(|y| y == row.year)
}

/// (mean, n present, n missing) of metric `m` over the scoped rows.
pub fn group_mean(
    rows: &[Row],
    m: usize,
    members: &BTreeSet<String>,
    year: Option<u16>,
) -> (Option<f64>, usize, usize) {
    let mut sum = 0.0;
    let mut n = 0;
    let mut missing = 0;
    for row in rows {
        if !in_scope(row, members, year) {
            continue;
        }
        match row.metrics[m] {
            Some(v) => {
                sum += v;
                n += 1;
            }
            None => missing += 1,
        }
    }
    let mean = if n > 0 { Some(sum / n as f64) } else { None };
    (mean, n, missing)
}

/// Respondent count per community, scoped by year.
pub fn counts_by_community(rows: &[Row], year: Option<u16>) -> BTreeMap<String, usize> {
    let mut out = BTreeMap::new();
    for row in rows {
        if year.is_none_or(|y| y == row.year) {
            *out.entry(row.community.clone()).or_insert(0) += 1;
        }
    }
    out
}

/// Per-community means sorted best first, ties by display name ascending.
/// `names` maps community id -> display name.
pub fn ordered_means(
    rows: &[Row],
    m: usize,
    names: &BTreeMap<String, String>,
    year: Option<u16>,
) -> Vec<(String, f64)> {
    let mut out = Vec::new();
    for id in names.keys() {
        let members: BTreeSet<String> = [id.clone()].into();
        if let (Some(mean), _, _) = group_mean(rows, m, &members, year) {
            out.push((id.clone(), mean));
        }
    }
    // simple insertion sort, kept deliberately naive
    for i in 1..out.len() {
        let mut j = i;
        while j > 0 {
            let (a, b) = (&out[j - 1], &out[j]);
            let swap = b.1 > a.1 || (b.1 == a.1 && names[&b.0] < names[&a.0]);
            if !swap {
                break;
            }
            out.swap(j - 1, j);
            j -= 1;
        }
    }
    out
}

/// Pairwise-complete (x, y) values for two metrics.
pub fn complete_pairs(
    rows: &[Row],
    mx: usize,
    my: usize,
    members: &BTreeSet<String>,
    year: Option<u16>,
) -> Vec<(f64, f64)> {
    rows.iter()
        .filter(|r| in_scope(r, members, year))
        .filter_map(|r| Some((r.metrics[mx]?, r.metrics[my]?)))
        .collect()
}

/// Textbook two-pass Pearson; `None` if n < 2 or either side is constant.
pub fn pearson(pairs: &[(f64, f64)]) -> Option<f64> {
    let n = pairs.len();
    if n < 2 {
        return None;
    }
    let first = pairs[0];
    if pairs.iter().all(|p| p.0 == first.0) || pairs.iter().all(|p| p.1 == first.1) {
        return None;
    }
    let mut sx = 0.0;
    let mut sy = 0.0;
    for p in pairs {
        sx += p.0;
        sy += p.1;
    }
    let mean_x = sx / n as f64;
    let mean_y = sy / n as f64;
    let mut cov = 0.0;
    let mut vx = 0.0;
    let mut vy = 0.0;
    for p in pairs {
        cov += (p.0 - mean_x) * (p.1 - mean_y);
        vx += (p.0 - mean_x) * (p.0 - mean_x);
        vy += (p.1 - mean_y) * (p.1 - mean_y);
    }
    Some(cov / (vx * vy).sqrt())
}

/// Equal-width edges; last edge exactly `hi`.
pub fn edges(lo: f64, hi: f64, bins: usize) -> Vec<f64> {
    let mut e = Vec::new();
    for i in 0..=bins {
        e.push(lo + (hi - lo) * i as f64 / bins as f64);
    }
    e[bins] = hi;
    e
}

/// Double loop over every cell for every value.
pub fn bin2d(pairs: &[(f64, f64)], x_edges: &[f64], y_edges: &[f64]) -> Vec<Vec<usize>> {
    let nx = x_edges.len() - 1;
    let ny = y_edges.len() - 1;
    let mut counts = vec![vec![0usize; ny]; nx];
    for &(x, y) in pairs {
        for i in 0..nx {
            let in_x =
                x >= x_edges[i] && (x < x_edges[i + 1] || (i == nx - 1 && x <= x_edges[i + 1]));
            if !in_x {
                continue;
            }
            for j in 0..ny {
                let in_y =
                    y >= y_edges[j] && (y < y_edges[j + 1] || (j == ny - 1 && y <= y_edges[j + 1]));
                if in_y {
                    counts[i][j] += 1;
                }
            }
        }
    }
    counts
}

/// Silverman bandwidth from its definition.
pub fn silverman(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let mut ss = 0.0;
    for v in values {
        ss += (v - mean) * (v - mean);
    }
    1.06 * (ss / (n - 1.0)).sqrt() * n.powf(-1.0 / 5.0)
}

/// Direct-sum Gaussian KDE at `x`.
pub fn kde(values: &[f64], h: f64, x: f64) -> f64 {
    let mut total = 0.0;
    for v in values {
        let u = (x - v) / h;
        total += (-u * u / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt();
    }
    total / (values.len() as f64 * h)
}

/// Composite trapezoid rule over sampled points.
pub fn trapezoid(xs: &[f64], ys: &[f64]) -> f64 {
    let mut area = 0.0;
    for i in 1..xs.len() {
        area += (xs[i] - xs[i - 1]) * (ys[i] + ys[i - 1]) / 2.0;
    }
    area
}

/// Line-by-line classification of a comma-separated export without quoting.
///
/// A data line is valid when it has the header's field count, a known
/// community in `community_col`, a survey year in `year_col`, and every
/// column listed in `scales` is either a sentinel or a number within its
/// (min, max). Returns (valid, invalid).
pub fn count_valid_lines(
    text: &str,
    community_col: &str,
    year_col: &str,
    communities: &BTreeSet<String>,
    scales: &BTreeMap<String, (f64, f64)>,
    sentinels: &[&str],
) -> (usize, usize) {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header: Vec<&str> = lines.next().expect("header").split(',').collect();
    let pos = |name: &str| {
        header
            .iter()
            .position(|h| *h == name)
            .expect("column present")
    };
    let (ci, yi) = (pos(community_col), pos(year_col));
    let checked: Vec<(usize, (f64, f64))> = scales.iter().map(|(c, s)| (pos(c), *s)).collect();
    let (mut valid, mut invalid) = (0, 0);
    for line in lines {
        let fields: Vec<&str> = line.split(',').collect();
        let ok = fields.len() == header.len()
            && communities.contains(fields[ci])
            && ["2008", "2009", "2010"].contains(&fields[yi])
            && checked.iter().all(|&(i, (lo, hi))| {
                let f = fields[i].trim();
                sentinels.iter().any(|s| s.eq_ignore_ascii_case(f))
                    || f.parse::<f64>().is_ok_and(|v| v >= lo && v <= hi)
            });
        if ok {
            valid += 1;
        } else {
            invalid += 1;
        }
    }
    (valid, invalid)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pearson_textbook() {
        let pairs = [(1.0, 2.0), (2.0, 4.0), (3.0, 6.5)];
        let r = pearson(&pairs).unwrap();
        assert!(r > 0.99 && r <= 1.0);
        assert_eq!(pearson(&[(1.0, 1.0), (1.0, 2.0)]), None);
    }

    #[test]
    fn bins_conserve() {
        let pairs = [(1.0, 1.0), (3.0, 5.0), (2.0, 3.0)];
        let c = bin2d(&pairs, &edges(1.0, 3.0, 4), &edges(1.0, 5.0, 4));
        assert_eq!(c.iter().flatten().sum::<usize>(), 3);
        assert_eq!(c[0][0], 1);
        assert_eq!(c[3][3], 1);
        assert_eq!(c[2][2], 1);
    }
}
