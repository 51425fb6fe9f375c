//! SVG renderings of the result tables.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::FRAC_PI_2;
use std::fmt::Write;

use lidbench::evaluate::SpeedScores;
use lidbench::report::{MapRow, PerfRow};
use lidbench::{CorpusType, LanguageCategory};

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

type Measure = fn(&PerfRow) -> Option<f64>;

fn precision(r: &PerfRow) -> Option<f64> {
    r.precision
}

fn recall(r: &PerfRow) -> Option<f64> {
    r.recall
}

fn rate(v: Option<f64>) -> f64 {
    v.unwrap_or(f64::NEG_INFINITY)
}

/// Orders by `primary`, then `secondary`, then prefers the simpler corpus.
fn slot_order(a: &PerfRow, b: &PerfRow, primary: Measure, secondary: Measure) -> Ordering {
    rate(primary(a))
        .total_cmp(&rate(primary(b)))
        .then(rate(secondary(a)).total_cmp(&rate(secondary(b))))
        .then(b.corpus.cmp(&a.corpus))
}

/// Keeps, per (detector, language), the precision-best and the recall-best
/// procedure. Equal scores are decided by the other measure, then by the
/// simpler corpus (T < J < A < G). A procedure best on both is kept once.
/// Rows with an undefined value never win that measure's slot.
pub fn select_plot_procedures(perf: &[PerfRow]) -> Vec<PerfRow> {
    let mut groups: BTreeMap<(&str, LanguageCategory), Vec<&PerfRow>> = BTreeMap::new();
    for r in perf {
        groups.entry((r.detector.as_str(), r.language)).or_default().push(r);
    }
    let mut out = Vec::new();
    for rows in groups.values() {
        let mut kept: BTreeSet<CorpusType> = BTreeSet::new();
        let slots: [(Measure, Measure); 2] = [(precision, recall), (recall, precision)];
        for (primary, secondary) in slots {
            let best = rows
                .iter()
                .filter(|r| primary(r).is_some())
                .max_by(|a, b| slot_order(a, b, primary, secondary));
            if let Some(b) = best {
                kept.insert(b.corpus);
            }
        }
        out.extend(rows.iter().filter(|r| kept.contains(&r.corpus)).map(|r| (*r).clone()));
    }
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

struct Svg {
    width: f64,
    height: f64,
    body: String,
}

impl Svg {
    fn new(width: f64, height: f64) -> Self {
        Self {
            width,
            height,
            body: String::new(),
        }
    }

    fn line(&mut self, x1: f64, y1: f64, x2: f64, y2: f64, stroke: &str, dashed: bool) {
        let dash = if dashed { r#" stroke-dasharray="4 3""# } else { "" };
        let _ = writeln!(
            self.body,
            r#"<line x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}" stroke="{stroke}"{dash}/>"#
        );
    }

    fn circle(&mut self, cx: f64, cy: f64, fill: &str) {
        let _ = writeln!(self.body, r#"<circle cx="{cx:.2}" cy="{cy:.2}" r="4" fill="{fill}"/>"#);
    }

    fn text(&mut self, x: f64, y: f64, anchor: &str, s: &str) {
        let _ = writeln!(
            self.body,
            r#"<text x="{x:.2}" y="{y:.2}" font-size="11" font-family="sans-serif" text-anchor="{anchor}">{}</text>"#,
            escape(s)
        );
    }

    fn polyline(&mut self, points: &[(f64, f64)], stroke: &str) {
        let pts: Vec<String> = points.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
        let _ = writeln!(
            self.body,
            r#"<polyline points="{}" fill="none" stroke="{stroke}" stroke-width="1.5"/>"#,
            pts.join(" ")
        );
    }

    fn finish(self) -> String {
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n\
             <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n{body}</svg>\n",
            w = self.width,
            h = self.height,
            body = self.body
        )
    }
}

/// Plot area inside margins, mapping unit coordinates to pixels.
struct Frame {
    left: f64,
    top: f64,
    width: f64,
    height: f64,
}

impl Frame {
    fn x(&self, u: f64) -> f64 {
        self.left + u * self.width
    }

    fn y(&self, v: f64) -> f64 {
        self.top + (1.0 - v) * self.height
    }

    fn axes(&self, svg: &mut Svg, x_label: &str, y_label: &str, x_ticks: &[(f64, String)], y_ticks: &[(f64, String)]) {
        let (x0, y0, x1, y1) = (self.x(0.0), self.y(0.0), self.x(1.0), self.y(1.0));
        svg.line(x0, y0, x1, y0, "black", false);
        svg.line(x0, y0, x0, y1, "black", false);
        for (u, label) in x_ticks {
            svg.line(self.x(*u), y0, self.x(*u), y0 + 4.0, "black", false);
            svg.text(self.x(*u), y0 + 16.0, "middle", label);
        }
        for (v, label) in y_ticks {
            svg.line(x0 - 4.0, self.y(*v), x0, self.y(*v), "black", false);
            svg.text(x0 - 6.0, self.y(*v) + 4.0, "end", label);
        }
        svg.text((x0 + x1) / 2.0, y0 + 34.0, "middle", x_label);
        svg.text(x0 - 40.0, (y0 + y1) / 2.0, "middle", y_label);
    }
}

fn unit_ticks() -> Vec<(f64, String)> {
    (0..=4).map(|i| (i as f64 / 4.0, format!("{:.2}", i as f64 / 4.0))).collect()
}

fn color_of(detectors: &[&str], d: &str) -> &'static str {
    PALETTE[detectors.iter().position(|x| *x == d).unwrap_or(0) % PALETTE.len()]
}

/// Precision against recall for one language, with dashed averages.
pub fn precision_recall_svg(language: LanguageCategory, rows: &[PerfRow]) -> String {
    let mut svg = Svg::new(520.0, 460.0);
    let frame = Frame {
        left: 70.0,
        top: 40.0,
        width: 400.0,
        height: 360.0,
    };
    svg.text(270.0, 24.0, "middle", &format!("Precision and recall: {}", language.code()));
    frame.axes(&mut svg, "recall", "precision", &unit_ticks(), &unit_ticks());
    let shown: Vec<&PerfRow> = rows
        .iter()
        .filter(|r| r.language == language && r.precision.is_some() && r.recall.is_some())
        .collect();
    if !shown.is_empty() {
        let n = shown.len() as f64;
        let mean_p = shown.iter().filter_map(|r| r.precision).sum::<f64>() / n;
        let mean_r = shown.iter().filter_map(|r| r.recall).sum::<f64>() / n;
        svg.line(frame.x(0.0), frame.y(mean_p), frame.x(1.0), frame.y(mean_p), "gray", true);
        svg.line(frame.x(mean_r), frame.y(0.0), frame.x(mean_r), frame.y(1.0), "gray", true);
    }
    let detectors: Vec<&str> = shown.iter().map(|r| r.detector.as_str()).collect::<BTreeSet<_>>().into_iter().collect();
    for r in &shown {
        let (x, y) = (frame.x(r.recall.unwrap()), frame.y(r.precision.unwrap()));
        svg.circle(x, y, color_of(&detectors, &r.detector));
        svg.text(x + 6.0, y - 6.0, "start", &format!("{}/{}", r.detector, r.corpus.label()));
    }
    svg.finish()
}

/// Speed scores on an arcsine-square-root axis, one row per detector.
pub fn speed_svg(speeds: &SpeedScores) -> String {
    let detectors: Vec<&str> = speeds.keys().map(|p| p.detector.as_str()).collect::<BTreeSet<_>>().into_iter().collect();
    let row_h = 28.0;
    let height = 90.0 + row_h * detectors.len() as f64;
    let mut svg = Svg::new(560.0, height);
    let frame = Frame {
        left: 130.0,
        top: 40.0,
        width: 400.0,
        height: row_h * detectors.len() as f64,
    };
    let scale = |s: f64| s.sqrt().asin() / FRAC_PI_2;
    svg.text(280.0, 24.0, "middle", "Normalized speed");
    let ticks: Vec<(f64, String)> = [0.0, 0.01, 0.1, 0.25, 0.5, 1.0]
        .iter()
        .map(|&s| (scale(s), format!("{s}")))
        .collect();
    frame.axes(&mut svg, "speed (arcsine scale)", "", &ticks, &[]);
    for (i, d) in detectors.iter().enumerate() {
        let y = frame.top + row_h * (i as f64 + 0.5);
        svg.text(frame.left - 8.0, y + 4.0, "end", d);
        let points: Vec<(CorpusType, f64)> = speeds
            .iter()
            .filter(|(p, _)| p.detector == *d)
            .map(|(p, &s)| (p.corpus_type, frame.x(scale(s))))
            .collect();
        let lo = points.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
        let hi = points.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
        svg.line(lo, y, hi, y, "gray", false);
        let color = color_of(&detectors, d);
        for (c, x) in points {
            svg.circle(x, y, color);
            svg.text(x, y - 7.0, "middle", c.label());
        }
    }
    svg.finish()
}

/// Best MAP estimate per detector against β at one γ.
pub fn map_curves_svg(rows: &[MapRow], gamma: f64) -> String {
    let mut best: BTreeMap<&str, BTreeMap<u64, (f64, f64)>> = BTreeMap::new();
    for r in rows.iter().filter(|r| r.gamma == gamma) {
        let slot = best.entry(r.detector.as_str()).or_default().entry(r.beta.to_bits()).or_insert((r.beta, r.map_estimate));
        slot.1 = slot.1.max(r.map_estimate);
    }
    let betas: Vec<f64> = best.values().flat_map(|m| m.values().map(|v| v.0)).collect();
    let b_lo = betas.iter().copied().fold(f64::INFINITY, f64::min);
    let b_hi = betas.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = if b_hi > b_lo { b_hi - b_lo } else { 1.0 };
    let u = |b: f64| (b - b_lo) / span;

    let mut svg = Svg::new(620.0, 460.0);
    let frame = Frame {
        left: 70.0,
        top: 40.0,
        width: 400.0,
        height: 360.0,
    };
    svg.text(270.0, 24.0, "middle", &format!("Best MAP estimate, gamma = {gamma}"));
    let x_ticks: Vec<(f64, String)> = if betas.is_empty() {
        Vec::new()
    } else {
        (0..=4).map(|i| {
            let b = b_lo + span * i as f64 / 4.0;
            (u(b), format!("{b:.2}"))
        })
        .collect()
    };
    frame.axes(&mut svg, "beta", "MAP", &x_ticks, &unit_ticks());
    let detectors: Vec<&str> = best.keys().copied().collect();
    for (i, (d, pts)) in best.iter().enumerate() {
        let color = color_of(&detectors, d);
        let line: Vec<(f64, f64)> = pts.values().map(|&(b, m)| (frame.x(u(b)), frame.y(m))).collect();
        svg.polyline(&line, color);
        let ly = frame.top + 14.0 * i as f64;
        svg.line(frame.x(1.0) + 12.0, ly, frame.x(1.0) + 30.0, ly, color, false);
        svg.text(frame.x(1.0) + 34.0, ly + 4.0, "start", d);
    }
    svg.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use lidbench::ProcedureId;

    fn row(corpus: CorpusType, p: Option<f64>, r: Option<f64>) -> PerfRow {
        PerfRow {
            detector: "d".into(),
            corpus,
            language: LanguageCategory::En,
            precision: p,
            recall: r,
        }
    }

    fn kept(rows: &[PerfRow]) -> Vec<CorpusType> {
        select_plot_procedures(rows).into_iter().map(|r| r.corpus).collect()
    }

    #[test]
    fn best_on_both_is_kept_alone() {
        let rows = [
            row(CorpusType::Titles, Some(0.5), Some(0.5)),
            row(CorpusType::TitlesAbstracts, Some(0.6), Some(0.4)),
            row(CorpusType::Greedy, Some(0.9), Some(0.9)),
        ];
        assert_eq!(kept(&rows), [CorpusType::Greedy]);
    }

    #[test]
    fn precision_tie_goes_to_better_recall() {
        let rows = [
            row(CorpusType::Titles, Some(0.8), Some(0.5)),
            row(CorpusType::TitlesAbstracts, Some(0.8), Some(0.6)),
            row(CorpusType::Greedy, Some(0.1), Some(0.9)),
        ];
        assert_eq!(kept(&rows), [CorpusType::TitlesAbstracts, CorpusType::Greedy]);
    }

    #[test]
    fn full_tie_goes_to_titles() {
        let rows: Vec<PerfRow> = CorpusType::ALL.iter().map(|&c| row(c, Some(0.7), Some(0.7))).collect();
        assert_eq!(kept(&rows), [CorpusType::Titles]);
        let rows = [
            row(CorpusType::Greedy, Some(0.7), Some(0.7)),
            row(CorpusType::TitlesJournals, Some(0.7), Some(0.7)),
            row(CorpusType::TitlesAbstracts, Some(0.7), Some(0.7)),
        ];
        assert_eq!(kept(&rows), [CorpusType::TitlesJournals]);
    }

    #[test]
    fn undefined_precision_cannot_win() {
        let rows = [
            row(CorpusType::Titles, None, Some(0.0)),
            row(CorpusType::Greedy, Some(0.2), Some(0.0)),
        ];
        assert_eq!(kept(&rows), [CorpusType::Greedy]);
    }

    #[test]
    fn groups_are_per_detector_and_language() {
        let mut other = row(CorpusType::Titles, Some(0.1), Some(0.1));
        other.language = LanguageCategory::Fr;
        let rows = [row(CorpusType::Greedy, Some(0.9), Some(0.9)), row(CorpusType::Titles, Some(0.1), Some(0.1)), other];
        assert_eq!(select_plot_procedures(&rows).len(), 2);
    }

    #[test]
    fn svgs_are_well_formed_and_deterministic() {
        let rows = [row(CorpusType::Titles, Some(0.5), Some(0.25)), row(CorpusType::Greedy, None, Some(0.1))];
        let a = precision_recall_svg(LanguageCategory::En, &rows);
        assert_eq!(a, precision_recall_svg(LanguageCategory::En, &rows));
        assert!(a.starts_with("<svg") && a.ends_with("</svg>\n"));
        assert_eq!(a.matches("<circle").count(), 1);

        let mut speeds = SpeedScores::new();
        speeds.insert(ProcedureId::new("a<b", CorpusType::Titles), 1.0);
        speeds.insert(ProcedureId::new("a<b", CorpusType::Greedy), 0.01);
        let s = speed_svg(&speeds);
        assert!(s.contains("a&lt;b"));
        assert_eq!(s.matches("<circle").count(), 2);

        let map = [
            MapRow { detector: "d".into(), corpus: CorpusType::Titles, beta: 0.5, gamma: 0.0, map_estimate: 0.4 },
            MapRow { detector: "d".into(), corpus: CorpusType::Greedy, beta: 0.5, gamma: 0.0, map_estimate: 0.6 },
            MapRow { detector: "d".into(), corpus: CorpusType::Titles, beta: 2.0, gamma: 0.0, map_estimate: 0.7 },
        ];
        let m = map_curves_svg(&map, 0.0);
        assert_eq!(m.matches("<polyline").count(), 1);
        assert!(m.contains(r#"points="70.00,184.00 470.00,148.00""#), "{m}");
    }
}
