//! Static HTML rendering of attention weights over a sentence.

use std::fmt::Write as _;

use crate::data::{Polarity, Span};

/// One sentence to render.
#[derive(Clone, Debug, PartialEq)]
pub struct HeatmapRow {
    pub title: String,
    pub tokens: Vec<String>,
    pub alpha: Vec<f64>,
    pub aspect: Span,
    pub predicted: Polarity,
    pub gold: Polarity,
}

/// α scaled so the largest weight is 1. All-zero input stays zero.
pub fn max_normalized(alpha: &[f64]) -> Vec<f64> {
    let m = alpha.iter().copied().fold(0.0, f64::max);
    if m <= 0.0 {
        return vec![0.0; alpha.len()];
    }
    alpha.iter().map(|a| (a / m).clamp(0.0, 1.0)).collect()
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&#39;"),
            c => out.push(c),
        }
    }
    out
}

/// A complete document with inline styles only; it needs no network access.
pub fn render_heatmap(rows: &[HeatmapRow]) -> String {
    let mut s = String::new();
    s.push_str(
        "<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\">\n<title>Attention heatmap</title>\n<style>\n\
         body { font-family: sans-serif; margin: 2em; }\n\
         .row { margin: 1.2em 0; }\n\
         .tok { display: inline-block; padding: 2px 4px; margin: 1px; border-radius: 3px; }\n\
         .aspect { text-decoration: underline; font-weight: bold; }\n\
         .meta { color: #444; font-size: 0.9em; }\n\
         </style>\n</head>\n<body>\n",
    );
    for row in rows {
        let heat = max_normalized(&row.alpha);
        let _ = writeln!(s, "<div class=\"row\">\n<div class=\"meta\">{}</div>\n<div>", escape(&row.title));
        for (i, tok) in row.tokens.iter().enumerate() {
            let h = heat.get(i).copied().unwrap_or(0.0);
            let a = row.alpha.get(i).copied().unwrap_or(0.0);
            let class = if row.aspect.contains(i) { "tok aspect" } else { "tok" };
            let _ = writeln!(
                s,
                "<span class=\"{class}\" style=\"background-color: rgba(220, 38, 38, {h:.4})\" title=\"alpha={a:.6}\" data-intensity=\"{h:.4}\">{}</span>",
                escape(tok)
            );
        }
        let _ = writeln!(
            s,
            "</div>\n<div class=\"meta\">predicted: {} &middot; gold: {}</div>\n</div>",
            row.predicted, row.gold
        );
    }
    s.push_str("</body>\n</html>\n");
    s
}
