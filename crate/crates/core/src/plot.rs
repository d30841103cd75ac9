//! Self-contained SVG plots of trajectories, time histories and guidance fields.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use crate::apf::{desired_heading_harmonic, inverse_square_gradient, ObstacleView, StaticObstacle, VortexLaw};
use crate::error::{Error, Result};
use crate::frames::{BodyVelocity, Pose, Vec2};
use crate::io::TrajectoryRow;
use crate::mmg::DynamicState;
use crate::scenario::{GuidanceParams, Scenario};

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 56.0;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    Path,
    Rudder,
    Heading,
    Distance,
    Crosstrack,
}

impl FromStr for PlotKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "path" => Ok(PlotKind::Path),
            "rudder" => Ok(PlotKind::Rudder),
            "heading" => Ok(PlotKind::Heading),
            "distance" => Ok(PlotKind::Distance),
            "crosstrack" => Ok(PlotKind::Crosstrack),
            other => Err(Error::invalid(
                "kind",
                format!("unknown plot kind `{other}` (expected path, rudder, heading, distance or crosstrack)"),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldKind {
    InverseSquare,
    SinkVortex,
    ModifiedVortex,
}

impl FromStr for FieldKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "inverse" => Ok(FieldKind::InverseSquare),
            "sinkvortex" => Ok(FieldKind::SinkVortex),
            "mvortex" => Ok(FieldKind::ModifiedVortex),
            other => Err(Error::invalid(
                "field",
                format!("unknown field `{other}` (expected inverse, sinkvortex or mvortex)"),
            )),
        }
    }
}

/// Axis-aligned data window mapped onto the drawing area.
#[derive(Debug, Clone, Copy)]
struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
    /// Data y grows downwards on screen (north-east-down plan views).
    y_down: bool,
}

impl Frame {
    fn fit(points: impl Iterator<Item = (f64, f64)>, pad: f64, y_down: bool) -> Self {
        let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for (x, y) in points {
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y);
            y1 = y1.max(y);
        }
        if !x0.is_finite() {
            (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
        }
        if x1 - x0 < 1e-9 {
            x0 -= 0.5;
            x1 += 0.5;
        }
        if y1 - y0 < 1e-9 {
            y0 -= 0.5;
            y1 += 0.5;
        }
        let px = (x1 - x0) * pad;
        let py = (y1 - y0) * pad;
        Self {
            x0: x0 - px,
            x1: x1 + px,
            y0: y0 - py,
            y1: y1 + py,
            y_down,
        }
    }

    /// Widens one axis so a unit in x and y has the same length on screen.
    fn equal_aspect(mut self) -> Self {
        let sx = (WIDTH - 2.0 * MARGIN) / (self.x1 - self.x0);
        let sy = (HEIGHT - 2.0 * MARGIN) / (self.y1 - self.y0);
        if sx < sy {
            let h = (HEIGHT - 2.0 * MARGIN) / sx;
            let c = 0.5 * (self.y0 + self.y1);
            self.y0 = c - h / 2.0;
            self.y1 = c + h / 2.0;
        } else {
            let w = (WIDTH - 2.0 * MARGIN) / sy;
            let c = 0.5 * (self.x0 + self.x1);
            self.x0 = c - w / 2.0;
            self.x1 = c + w / 2.0;
        }
        self
    }

    fn px(&self, x: f64) -> f64 {
        MARGIN + (x - self.x0) / (self.x1 - self.x0) * (WIDTH - 2.0 * MARGIN)
    }

    fn py(&self, y: f64) -> f64 {
        let f = (y - self.y0) / (self.y1 - self.y0);
        if self.y_down {
            MARGIN + f * (HEIGHT - 2.0 * MARGIN)
        } else {
            HEIGHT - MARGIN - f * (HEIGHT - 2.0 * MARGIN)
        }
    }

    fn scale(&self) -> f64 {
        (WIDTH - 2.0 * MARGIN) / (self.x1 - self.x0)
    }
}

fn nice_step(span: f64) -> f64 {
    let raw = span / 6.0;
    let mag = 10f64.powf(raw.log10().floor());
    let f = raw / mag;
    let m = if f < 1.5 {
        1.0
    } else if f < 3.5 {
        2.0
    } else if f < 7.5 {
        5.0
    } else {
        10.0
    };
    m * mag
}

fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let step = nice_step(hi - lo);
    let mut t = (lo / step).ceil() * step;
    let mut out = Vec::new();
    while t <= hi + 1e-9 * step {
        out.push(if t.abs() < 1e-12 * step { 0.0 } else { t });
        t += step;
    }
    out
}

struct Svg {
    body: String,
}

impl Svg {
    fn new(title: &str) -> Self {
        let mut body = String::new();
        let _ = writeln!(
            body,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(body, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(
            body,
            r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#,
            WIDTH / 2.0,
            escape(title)
        );
        Self { body }
    }

    fn axes(&mut self, f: &Frame, xlabel: &str, ylabel: &str) {
        let b = &mut self.body;
        let _ = writeln!(
            b,
            r##"<rect class="axes" x="{MARGIN}" y="{MARGIN}" width="{}" height="{}" fill="none" stroke="#444"/>"##,
            WIDTH - 2.0 * MARGIN,
            HEIGHT - 2.0 * MARGIN
        );
        for t in ticks(f.x0, f.x1) {
            let x = f.px(t);
            let _ = writeln!(
                b,
                r##"<line x1="{x:.2}" y1="{}" x2="{x:.2}" y2="{}" stroke="#ddd"/><text x="{x:.2}" y="{}" text-anchor="middle">{}</text>"##,
                MARGIN,
                HEIGHT - MARGIN,
                HEIGHT - MARGIN + 16.0,
                fmt_tick(t)
            );
        }
        for t in ticks(f.y0, f.y1) {
            let y = f.py(t);
            let _ = writeln!(
                b,
                r##"<line x1="{}" y1="{y:.2}" x2="{}" y2="{y:.2}" stroke="#ddd"/><text x="{}" y="{:.2}" text-anchor="end">{}</text>"##,
                MARGIN,
                WIDTH - MARGIN,
                MARGIN - 6.0,
                y + 4.0,
                fmt_tick(t)
            );
        }
        let _ = writeln!(
            b,
            r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
            WIDTH / 2.0,
            HEIGHT - 12.0,
            escape(xlabel)
        );
        let _ = writeln!(
            b,
            r#"<text x="14" y="{}" text-anchor="middle" transform="rotate(-90 14 {})">{}</text>"#,
            HEIGHT / 2.0,
            HEIGHT / 2.0,
            escape(ylabel)
        );
    }

    fn polyline(&mut self, f: &Frame, class: &str, pts: &[(f64, f64)], color: &str, dash: bool) {
        if pts.is_empty() {
            return;
        }
        let mut d = String::new();
        for &(x, y) in pts {
            let _ = write!(d, "{:.2},{:.2} ", f.px(x), f.py(y));
        }
        let dash = if dash { r#" stroke-dasharray="6 4""# } else { "" };
        let _ = writeln!(
            self.body,
            r#"<polyline class="{class}" points="{}" fill="none" stroke="{color}" stroke-width="1.5"{dash}/>"#,
            d.trim_end()
        );
    }

    fn circle(&mut self, f: &Frame, class: &str, c: Vec2, r_data: f64, style: &str) {
        let _ = writeln!(
            self.body,
            r#"<circle class="{class}" cx="{:.2}" cy="{:.2}" r="{:.2}" {style}/>"#,
            f.px(c.x),
            f.py(c.y),
            (r_data * f.scale()).max(2.0)
        );
    }

    fn legend(&mut self, entries: &[(String, &str, bool)]) {
        for (k, (label, color, dash)) in entries.iter().enumerate() {
            let y = MARGIN + 14.0 + 16.0 * k as f64;
            let x = WIDTH - MARGIN - 150.0;
            let dash = if *dash { r#" stroke-dasharray="6 4""# } else { "" };
            let _ = writeln!(
                self.body,
                r#"<line x1="{x}" y1="{y}" x2="{}" y2="{y}" stroke="{color}" stroke-width="2"{dash}/><text x="{}" y="{}">{}</text>"#,
                x + 24.0,
                x + 30.0,
                y + 4.0,
                escape(label)
            );
        }
    }

    fn finish(mut self) -> String {
        self.body.push_str("</svg>\n");
        self.body
    }
}

fn fmt_tick(t: f64) -> String {
    let s = format!("{t:.3}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn color(i: usize) -> &'static str {
    PALETTE[i % PALETTE.len()]
}

fn by_agent(rows: &[TrajectoryRow]) -> BTreeMap<u32, Vec<&TrajectoryRow>> {
    let mut m: BTreeMap<u32, Vec<&TrajectoryRow>> = BTreeMap::new();
    for r in rows {
        m.entry(r.agent_id).or_default().push(r);
    }
    m
}

/// Agent id pair with its `(t', distance)` series.
pub type PairSeries = ((u32, u32), Vec<(f64, f64)>);

/// Centre distance of every agent pair at the instants both are present.
pub fn pairwise_distances(rows: &[TrajectoryRow]) -> Vec<PairSeries> {
    let mut at: BTreeMap<u64, Vec<&TrajectoryRow>> = BTreeMap::new();
    for r in rows {
        at.entry(r.t_prime.to_bits()).or_default().push(r);
    }
    let mut pairs: BTreeMap<(u32, u32), Vec<(f64, f64)>> = BTreeMap::new();
    let mut instants: Vec<_> = at.into_values().collect();
    instants.sort_by(|a, b| a[0].t_prime.total_cmp(&b[0].t_prime));
    for group in instants {
        for (i, a) in group.iter().enumerate() {
            for b in &group[i + 1..] {
                let key = (a.agent_id.min(b.agent_id), a.agent_id.max(b.agent_id));
                let d = (a.x - b.x).hypot(a.y - b.y);
                pairs.entry(key).or_default().push((a.t_prime, d));
            }
        }
    }
    pairs.into_iter().collect()
}

/// Plan view or time history of a recorded run.
///
/// `scenario`, when given, adds waypoints, acceptance circles, obstacles and
/// channel walls to path plots.
pub fn plot_trajectory(kind: PlotKind, rows: &[TrajectoryRow], scenario: Option<&Scenario>) -> Result<String> {
    if rows.is_empty() {
        return Err(Error::invalid("trajectory", "no rows to plot"));
    }
    let agents = by_agent(rows);
    Ok(match kind {
        PlotKind::Path => path_plot(&agents, scenario),
        PlotKind::Rudder => history(
            &agents,
            "Rudder angle",
            "rudder (deg)",
            |r| r.delta.to_degrees(),
            Some(("commanded", |r: &TrajectoryRow| r.delta_c.to_degrees())),
        ),
        PlotKind::Heading => history(
            &agents,
            "Heading",
            "heading (deg)",
            |r| r.psi.to_degrees(),
            Some(("desired", |r: &TrajectoryRow| r.psi_d.to_degrees())),
        ),
        PlotKind::Crosstrack => history(&agents, "Cross-track error", "y_e (L)", |r| r.y_e, None),
        PlotKind::Distance => distance_plot(rows),
    })
}

fn path_plot(agents: &BTreeMap<u32, Vec<&TrajectoryRow>>, scenario: Option<&Scenario>) -> String {
    let mut extent: Vec<(f64, f64)> = agents.values().flatten().map(|r| (r.x, r.y)).collect();
    if let Some(sc) = scenario {
        for a in &sc.agents {
            extent.extend(a.path_points().iter().map(|p| (p.x, p.y)));
        }
        for o in &sc.obstacles {
            extent.push((o.center.x - o.radius, o.center.y - o.radius));
            extent.push((o.center.x + o.radius, o.center.y + o.radius));
        }
    }
    let f = Frame::fit(extent.into_iter(), 0.08, true).equal_aspect();
    let mut svg = Svg::new("Vessel paths");
    svg.axes(&f, "x (L)", "y (L), starboard positive");
    if let Some(sc) = scenario {
        if let Some(ch) = &sc.channel {
            for w in &ch.walls {
                svg.polyline(&f, "channel", &[(w.a.x, w.a.y), (w.b.x, w.b.y)], "#555", false);
            }
        }
        for o in &sc.obstacles {
            svg.circle(&f, "obstacle", o.center, o.radius, r##"fill="#b33" fill-opacity="0.8""##);
            svg.circle(
                &f,
                "safe-radius",
                o.center,
                sc.config.r_safe,
                r##"fill="none" stroke="#b33" stroke-dasharray="3 3""##,
            );
        }
        for (k, a) in sc.agents.iter().enumerate() {
            for &w in &a.waypoints {
                svg.circle(
                    &f,
                    "tolerance",
                    w,
                    sc.params.ilos.r_tol,
                    r##"fill="none" stroke="#888" stroke-dasharray="2 3""##,
                );
                let _ = writeln!(
                    svg.body,
                    r#"<rect class="waypoint" x="{:.2}" y="{:.2}" width="8" height="8" fill="{}"/>"#,
                    f.px(w.x) - 4.0,
                    f.py(w.y) - 4.0,
                    color(k)
                );
            }
        }
    }
    let mut legend = Vec::new();
    for (k, (id, rows)) in agents.iter().enumerate() {
        let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.x, r.y)).collect();
        svg.polyline(&f, "trajectory", &pts, color(k), false);
        if let Some(first) = rows.first() {
            svg.circle(&f, "start", Vec2::new(first.x, first.y), 0.0, &format!(r#"fill="{}""#, color(k)));
        }
        legend.push((format!("agent {id}"), color(k), false));
    }
    svg.legend(&legend);
    svg.finish()
}

type Series = fn(&TrajectoryRow) -> f64;

fn history(
    agents: &BTreeMap<u32, Vec<&TrajectoryRow>>,
    title: &str,
    ylabel: &str,
    main: Series,
    secondary: Option<(&str, Series)>,
) -> String {
    let mut extent: Vec<(f64, f64)> = agents.values().flatten().map(|r| (r.t_prime, main(r))).collect();
    if let Some((_, s)) = secondary {
        extent.extend(agents.values().flatten().map(|r| (r.t_prime, s(r))));
    }
    let f = Frame::fit(extent.into_iter(), 0.05, false);
    let mut svg = Svg::new(title);
    svg.axes(&f, "t' (nondimensional)", ylabel);
    let mut legend = Vec::new();
    for (k, (id, rows)) in agents.iter().enumerate() {
        let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.t_prime, main(r))).collect();
        svg.polyline(&f, "series", &pts, color(k), false);
        legend.push((format!("agent {id}"), color(k), false));
        if let Some((label, s)) = secondary {
            let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.t_prime, s(r))).collect();
            svg.polyline(&f, "series-secondary", &pts, color(k), true);
            legend.push((format!("agent {id} {label}"), color(k), true));
        }
    }
    svg.legend(&legend);
    svg.finish()
}

fn distance_plot(rows: &[TrajectoryRow]) -> String {
    let pairs = pairwise_distances(rows);
    let f = Frame::fit(
        pairs.iter().flat_map(|(_, s)| s.iter().copied()).chain([(rows[0].t_prime, 0.0)]),
        0.05,
        false,
    );
    let mut svg = Svg::new("Distance between agents");
    svg.axes(&f, "t' (nondimensional)", "distance (L)");
    let mut legend = Vec::new();
    for (k, ((a, b), series)) in pairs.iter().enumerate() {
        svg.polyline(&f, "distance", series, color(k), false);
        legend.push((format!("agents {a}-{b}"), color(k), false));
    }
    if let Some(min) = pairs
        .iter()
        .flat_map(|(_, s)| s.iter().map(|p| p.1))
        .min_by(f64::total_cmp)
    {
        let _ = writeln!(svg.body, r#"<desc class="min-distance">{min}</desc>"#);
    }
    svg.legend(&legend);
    svg.finish()
}

/// Single-obstacle scene for field plots. Each grid point is evaluated for a
/// vessel there heading along `heading` at design speed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldScene {
    pub goal: Vec2,
    pub obstacle: StaticObstacle,
    /// Lower-left and upper-right corners of the grid.
    pub lo: Vec2,
    pub hi: Vec2,
    pub nx: usize,
    pub ny: usize,
    pub heading: f64,
}

impl Default for FieldScene {
    fn default() -> Self {
        Self {
            goal: Vec2::new(10.0, 0.0),
            obstacle: StaticObstacle {
                center: Vec2::new(-10.0, 0.0),
                radius: 0.5,
            },
            lo: Vec2::new(-25.0, -15.0),
            hi: Vec2::new(15.0, 15.0),
            nx: 33,
            ny: 25,
            heading: 0.0,
        }
    }
}

/// Grid points with the unit direction the field commands there.
pub fn field_arrows(kind: FieldKind, scene: &FieldScene, params: &GuidanceParams, r_safe: f64) -> Vec<(Vec2, Vec2)> {
    let obs = [ObstacleView::fixed(&scene.obstacle)];
    let mut out = Vec::with_capacity(scene.nx * scene.ny);
    for j in 0..scene.ny {
        for i in 0..scene.nx {
            let fx = if scene.nx > 1 { i as f64 / (scene.nx - 1) as f64 } else { 0.5 };
            let fy = if scene.ny > 1 { j as f64 / (scene.ny - 1) as f64 } else { 0.5 };
            let p = Vec2::new(
                scene.lo.x + fx * (scene.hi.x - scene.lo.x),
                scene.lo.y + fy * (scene.hi.y - scene.lo.y),
            );
            if p.distance(scene.obstacle.center) <= scene.obstacle.radius || p.distance(scene.goal) < 1e-9 {
                continue;
            }
            let dir = match kind {
                FieldKind::InverseSquare => match inverse_square_gradient(p, scene.goal, &obs, &params.inverse_square) {
                    Ok(g) => g * (1.0 / g.norm()),
                    Err(_) => continue,
                },
                FieldKind::SinkVortex | FieldKind::ModifiedVortex => {
                    let own = DynamicState {
                        pose: Pose::new(p.x, p.y, scene.heading),
                        nu: BodyVelocity::new(1.0, 0.0, 0.0),
                        delta: 0.0,
                        n_prop: 0.0,
                    };
                    let law = if kind == FieldKind::ModifiedVortex {
                        VortexLaw::Modified
                    } else {
                        VortexLaw::Constant
                    };
                    let h = desired_heading_harmonic(&own, scene.goal, &obs, None, &params.harmonic, r_safe, law, 0.0);
                    if !h.fresh {
                        continue;
                    }
                    Vec2::from_angle(h.psi_d)
                }
            };
            out.push((p, dir));
        }
    }
    out
}

pub fn plot_field(kind: FieldKind, scene: &FieldScene, params: &GuidanceParams, r_safe: f64) -> String {
    let title = match kind {
        FieldKind::InverseSquare => "Inverse-square field",
        FieldKind::SinkVortex => "Sink-vortex field",
        FieldKind::ModifiedVortex => "Modified sink-vortex field",
    };
    let f = Frame::fit([(scene.lo.x, scene.lo.y), (scene.hi.x, scene.hi.y)].into_iter(), 0.03, true).equal_aspect();
    let mut svg = Svg::new(title);
    svg.axes(&f, "x (L)", "y (L), starboard positive");
    let spacing = ((scene.hi.x - scene.lo.x) / scene.nx.max(2) as f64).min((scene.hi.y - scene.lo.y) / scene.ny.max(2) as f64);
    let len = 0.8 * spacing * f.scale();
    for (p, d) in field_arrows(kind, scene, params, r_safe) {
        let (x, y) = (f.px(p.x), f.py(p.y));
        // screen y follows data y, so the direction maps without a flip
        let (ex, ey) = (x + d.x * len, y + d.y * len * if f.y_down { 1.0 } else { -1.0 });
        let back = d.rotate(std::f64::consts::PI);
        let (h1, h2) = (back.rotate(0.4), back.rotate(-0.4));
        let hl = 0.35 * len;
        let _ = writeln!(
            svg.body,
            r##"<path class="arrow" d="M{x:.2},{y:.2} L{ex:.2},{ey:.2} M{:.2},{:.2} L{ex:.2},{ey:.2} L{:.2},{:.2}" stroke="#1f77b4" fill="none"/>"##,
            ex + h1.x * hl,
            ey + h1.y * hl,
            ex + h2.x * hl,
            ey + h2.y * hl
        );
    }
    svg.circle(&f, "obstacle", scene.obstacle.center, scene.obstacle.radius, r##"fill="#b33""##);
    svg.circle(&f, "goal", scene.goal, 0.0, r##"fill="#2ca02c""##);
    svg.finish()
}
