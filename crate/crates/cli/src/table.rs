//! Aligned plain-text tables in the layout of published regression output:
//! one column per fitted specification, estimates over parenthesized
//! standard errors, significance stars, and a statistics footer.

use crosslab_core::stats::significance_stars;

/// Estimate to three decimals with stars at the 10/5/1% levels.
pub fn estimate_cell(value: f64, p_value: f64) -> String {
    format!("{:.3}{}", value, significance_stars(p_value))
}

/// Standard error to three decimals, parenthesized.
pub fn se_cell(se: f64) -> String {
    format!("({se:.3})")
}

/// Thousands-separated integer, the way sample sizes are usually printed.
pub fn count_cell(n: usize) -> String {
    let digits = n.to_string();
    let mut out = String::with_capacity(digits.len() + digits.len() / 3);
    for (i, c) in digits.chars().enumerate() {
        if i > 0 && (digits.len() - i).is_multiple_of(3) {
            out.push(',');
        }
        out.push(c);
    }
    out
}

/// One column of a coefficient table.
pub struct Column {
    /// Header lines, e.g. a column number over a short spec label.
    pub header: Vec<String>,
    /// `(estimate, standard error, p-value)` per row label; `None` leaves
    /// the cells blank when the specification omits that regressor.
    pub cells: Vec<Option<(f64, f64, f64)>>,
    /// Footer statistics, already formatted, one per stat label.
    pub stats: Vec<String>,
}

/// Renders the table: header lines, a rule, two physical lines per
/// coefficient row (estimate, then standard error), a rule, then the
/// footer statistics. The label column is left-aligned, everything else
/// right-aligned.
pub fn coefficient_table(
    row_labels: &[&str],
    stat_labels: &[&str],
    columns: &[Column],
) -> String {
    let header_depth = columns.iter().map(|c| c.header.len()).max().unwrap_or(0);
    let mut lines: Vec<Option<Vec<String>>> = Vec::new(); // None = horizontal rule

    for level in 0..header_depth {
        let mut row = vec![String::new()];
        row.extend(columns.iter().map(|c| c.header.get(level).cloned().unwrap_or_default()));
        lines.push(Some(row));
    }
    lines.push(None);
    for (i, label) in row_labels.iter().enumerate() {
        let mut est = vec![(*label).to_string()];
        let mut se = vec![String::new()];
        for c in columns {
            match c.cells.get(i).copied().flatten() {
                Some((b, s, p)) => {
                    est.push(estimate_cell(b, p));
                    se.push(se_cell(s));
                }
                None => {
                    est.push(String::new());
                    se.push(String::new());
                }
            }
        }
        lines.push(Some(est));
        lines.push(Some(se));
    }
    lines.push(None);
    for (i, label) in stat_labels.iter().enumerate() {
        let mut row = vec![(*label).to_string()];
        row.extend(columns.iter().map(|c| c.stats.get(i).cloned().unwrap_or_default()));
        lines.push(Some(row));
    }

    render(&lines)
}

/// Single-line rows under a header rule; used for the t-test layout.
pub fn plain_table(headers: &[&str], rows: &[Vec<String>]) -> String {
    let mut lines: Vec<Option<Vec<String>>> = Vec::new();
    lines.push(Some(headers.iter().map(|h| (*h).to_string()).collect()));
    lines.push(None);
    for row in rows {
        lines.push(Some(row.clone()));
    }
    render(&lines)
}

fn render(lines: &[Option<Vec<String>>]) -> String {
    let ncols = lines.iter().flatten().map(Vec::len).max().unwrap_or(0);
    let mut widths = vec![0usize; ncols];
    for row in lines.iter().flatten() {
        for (j, cell) in row.iter().enumerate() {
            widths[j] = widths[j].max(cell.chars().count());
        }
    }
    let total: usize = widths.iter().sum::<usize>() + 2 * widths.len().saturating_sub(1);

    let mut out = String::new();
    for line in lines {
        match line {
            None => {
                out.push_str(&"-".repeat(total));
                out.push('\n');
            }
            Some(row) => {
                let mut rendered = String::new();
                for (j, width) in widths.iter().enumerate() {
                    if j > 0 {
                        rendered.push_str("  ");
                    }
                    let cell = row.get(j).map(String::as_str).unwrap_or("");
                    let pad = width - cell.chars().count();
                    if j == 0 {
                        rendered.push_str(cell);
                        rendered.push_str(&" ".repeat(pad));
                    } else {
                        rendered.push_str(&" ".repeat(pad));
                        rendered.push_str(cell);
                    }
                }
                while rendered.ends_with(' ') {
                    rendered.pop();
                }
                out.push_str(&rendered);
                out.push('\n');
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cells_format_with_stars_parentheses_and_separators() {
        assert_eq!(estimate_cell(-0.402, 0.0021), "-0.402***");
        assert_eq!(estimate_cell(-0.204, 0.031), "-0.204**");
        assert_eq!(estimate_cell(0.144, 0.0899), "0.144*");
        assert_eq!(estimate_cell(-3.249, 0.5562), "-3.249");
        assert_eq!(se_cell(0.1234), "(0.123)");
        assert_eq!(count_cell(46), "46");
        assert_eq!(count_cell(1851), "1,851");
        assert_eq!(count_cell(5553), "5,553");
        assert_eq!(count_cell(1234567), "1,234,567");
    }

    #[test]
    fn coefficient_table_interleaves_estimates_and_errors() {
        let col = Column {
            header: vec!["(1)".into(), "level".into()],
            cells: vec![Some((-0.402, 0.123, 0.002)), None],
            stats: vec!["0.200".into(), "46".into()],
        };
        let text = coefficient_table(&["e_lag", "d_dep_lag"], &["R2", "N"], &[col]);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0].trim(), "(1)");
        assert_eq!(lines[1].trim(), "level");
        assert!(lines[2].starts_with('-'));
        assert_eq!(lines[3], "e_lag      -0.402***");
        assert_eq!(lines[4].trim(), "(0.123)");
        // the omitted regressor leaves both of its lines blank
        assert_eq!(lines[5].trim(), "d_dep_lag");
        assert_eq!(lines[6].trim(), "");
        assert!(lines[7].starts_with('-'));
        assert_eq!(lines[8], "R2             0.200");
        assert_eq!(lines[9], "N                 46");
    }

    #[test]
    fn plain_table_right_aligns_numeric_columns() {
        let text = plain_table(
            &["Variable", "Mean"],
            &[
                vec!["people".into(), "134.857".into()],
                vec!["rubber".into(), "0.844".into()],
            ],
        );
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "Variable     Mean");
        assert_eq!(lines[2], "people    134.857");
        assert_eq!(lines[3], "rubber      0.844");
    }
}
