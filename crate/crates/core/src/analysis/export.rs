//! On-disk analysis bundle: CSV tables, grid files and a JSON manifest.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::grids::{density_heatmap, knn_score_map, GridKind, ScoreGrid};
use super::scoring::{fraction_below, mean_scores, trial_rows, ConditionFilter, Dimension};
use super::trends::{normalized_time_curves, participant_slopes, search_paths, CurveBin};
use super::AnalysisError;
use crate::geometry::{Rect, P2};
use crate::logging::{LoadedSession, Tracker};
use crate::session::{Movement, System};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KnnAttribution {
    /// Scores placed at the true (end) source position.
    #[default]
    Source,
    /// Scores placed at the guess.
    Guess,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExportOptions {
    pub bounds: Rect,
    pub bins: usize,
    pub k: usize,
    pub curve_bins: usize,
    pub threshold: f64,
    pub attribution: KnnAttribution,
}

impl Default for ExportOptions {
    fn default() -> Self {
        Self {
            bounds: Rect::square(P2::origin(), 2.0),
            bins: 40,
            k: 15,
            curve_bins: 20,
            threshold: 0.2,
            attribution: KnnAttribution::Source,
        }
    }
}

/// One file of the bundle. `plot` names the renderer kind for figure data and
/// is absent for plain tables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BundleEntry {
    pub file: String,
    pub plot: Option<String>,
    pub title: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub version: u32,
    pub sessions: usize,
    pub trials: usize,
    pub bounds: [f64; 4],
    pub bins: usize,
    pub k: usize,
    pub knn_attribution: KnnAttribution,
    pub entries: Vec<BundleEntry>,
}

impl Manifest {
    pub fn load(dir: &Path) -> Result<Self, AnalysisError> {
        let text = fs::read_to_string(dir.join(MANIFEST_FILE))?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn figures(&self) -> impl Iterator<Item = &BundleEntry> {
        self.entries.iter().filter(|e| e.plot.is_some())
    }
}

/// Grid text: `# key=value` headers, then `ny` rows of `nx` comma-separated
/// values, first row at the lowest y.
pub fn write_grid(grid: &ScoreGrid, label: &str) -> String {
    let b = &grid.bounds;
    let mut s = String::new();
    let _ = writeln!(s, "# kind={}", grid.kind.as_str());
    let _ = writeln!(s, "# label={label}");
    let _ = writeln!(
        s,
        "# bounds={},{},{},{}",
        b.min.x, b.min.y, b.max.x, b.max.y
    );
    let _ = writeln!(s, "# bins={},{}", grid.nx, grid.ny);
    let _ = writeln!(s, "# overflow={}", grid.overflow);
    for row in grid.values.chunks(grid.nx) {
        let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    s
}

pub fn read_grid(path: &Path, text: &str) -> Result<ScoreGrid, AnalysisError> {
    let err = |line: usize, message: String| AnalysisError::Parse {
        path: path.display().to_string(),
        line,
        message,
    };
    let floats = |line: usize, s: &str| -> Result<Vec<f64>, AnalysisError> {
        s.split(',')
            .map(|v| {
                v.trim()
                    .parse::<f64>()
                    .map_err(|e| err(line, format!("{v:?}: {e}")))
            })
            .collect()
    };
    let (mut kind, mut bounds, mut bins, mut overflow) = (None, None, None, 0usize);
    let mut values = Vec::new();
    let mut rows = 0;
    for (n, line) in text.lines().enumerate() {
        let ln = n + 1;
        if let Some(h) = line.strip_prefix('#') {
            let Some((k, v)) = h.trim().split_once('=') else {
                continue;
            };
            match k {
                "kind" => {
                    kind = Some(match v {
                        "density" => GridKind::Density,
                        "knn_score" => GridKind::KnnScore,
                        other => return Err(err(ln, format!("unknown kind {other:?}"))),
                    })
                }
                "bounds" => {
                    let f = floats(ln, v)?;
                    if f.len() != 4 {
                        return Err(err(ln, "bounds needs 4 values".into()));
                    }
                    bounds = Some(Rect::new(P2::new(f[0], f[1]), P2::new(f[2], f[3])));
                }
                "bins" => {
                    let b: Result<Vec<usize>, _> = v.split(',').map(|x| x.trim().parse()).collect();
                    match b.as_deref() {
                        Ok([nx, ny]) => bins = Some((*nx, *ny)),
                        _ => return Err(err(ln, format!("bad bins {v:?}"))),
                    }
                }
                "overflow" => {
                    overflow = v.parse().map_err(|e| err(ln, format!("overflow: {e}")))?
                }
                _ => {}
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let row = floats(ln, line)?;
        let (nx, _) = bins.ok_or_else(|| err(ln, "data before bins header".into()))?;
        if row.len() != nx {
            return Err(err(
                ln,
                format!("expected {nx} values, found {}", row.len()),
            ));
        }
        values.extend(row);
        rows += 1;
    }
    let last = text.lines().count();
    let (nx, ny) = bins.ok_or_else(|| err(last, "missing bins header".into()))?;
    if rows != ny {
        return Err(err(last, format!("expected {ny} rows, found {rows}")));
    }
    Ok(ScoreGrid {
        kind: kind.ok_or_else(|| err(last, "missing kind header".into()))?,
        bounds: bounds.ok_or_else(|| err(last, "missing bounds header".into()))?,
        nx,
        ny,
        values,
        overflow,
    })
}

struct Bundle<'a> {
    dir: &'a Path,
    entries: Vec<BundleEntry>,
}

impl Bundle<'_> {
    fn put(
        &mut self,
        file: &str,
        plot: Option<&str>,
        title: &str,
        body: String,
    ) -> Result<(), AnalysisError> {
        fs::write(self.dir.join(file), body)?;
        self.entries.push(BundleEntry {
            file: file.to_string(),
            plot: plot.map(str::to_string),
            title: title.to_string(),
        });
        Ok(())
    }
}

fn score_table(sessions: &[LoadedSession], dims: &[Dimension], filter: &ConditionFilter) -> String {
    let mut s = String::new();
    let names: Vec<&str> = dims.iter().map(|d| d.name()).collect();
    let _ = writeln!(s, "{},mean_score,mean_guess_time,n", names.join(","));
    for g in mean_scores(sessions, dims, filter) {
        let _ = writeln!(
            s,
            "{},{},{},{}",
            g.key.join(","),
            g.mean_score,
            g.mean_guess_time,
            g.n
        );
    }
    s
}

fn curve_table(curve: &[CurveBin]) -> String {
    let mut s = String::from("bin,t_norm,mean_distance,n_trials\n");
    for (i, c) in curve.iter().enumerate() {
        let d = c.mean_distance.map(|d| d.to_string()).unwrap_or_default();
        let _ = writeln!(s, "{i},{},{d},{}", c.t_norm, c.n_trials);
    }
    s
}

/// Writes every analysis table and grid into `dir` plus `manifest.json`;
/// returns the manifest path.
pub fn export_analysis(
    sessions: &[LoadedSession],
    dir: &Path,
    opts: &ExportOptions,
) -> Result<PathBuf, AnalysisError> {
    let all = ConditionFilter::all();
    if trial_rows(sessions, &all).is_empty() {
        return Err(AnalysisError::EmptySelection);
    }
    fs::create_dir_all(dir)?;
    let mut b = Bundle {
        dir,
        entries: Vec::new(),
    };
    let (nx, ny) = (opts.bins, opts.bins);

    b.put(
        "scores_system_movement.csv",
        None,
        "Mean score and guess time by system and movement",
        score_table(sessions, &[Dimension::System, Dimension::Movement], &all),
    )?;
    b.put(
        "scores_system_sound.csv",
        None,
        "Mean score by system and sound",
        score_table(sessions, &[Dimension::System, Dimension::Sound], &all),
    )?;
    let static_only = ConditionFilter {
        movement: Some(Movement::Static),
        ..all
    };
    b.put(
        "scores_system_environment_sound.csv",
        None,
        "Mean score by system, environment and sound (static trials)",
        score_table(
            sessions,
            &[Dimension::System, Dimension::Environment, Dimension::Sound],
            &static_only,
        ),
    )?;

    let mut frac = String::from("system,threshold,fraction,n\n");
    for &system in System::ALL {
        let f = ConditionFilter::system(system);
        let n = trial_rows(sessions, &f).len();
        if n > 0 {
            let v = fraction_below(sessions, opts.threshold, &f)?;
            let _ = writeln!(frac, "{system},{},{v},{n}", opts.threshold);
        }
    }
    b.put(
        "fraction_below.csv",
        None,
        "Share of trials under the score threshold",
        frac,
    )?;

    let targets: Vec<P2> = trial_rows(sessions, &all)
        .iter()
        .map(|(_, r)| r.target())
        .collect();
    let g = density_heatmap(&targets, &opts.bounds, nx, ny)?;
    b.put(
        "heatmap_sources.csv",
        Some("heatmap"),
        "Source positions",
        write_grid(&g, "sources"),
    )?;

    for &system in System::ALL {
        let rows = trial_rows(sessions, &ConditionFilter::system(system));
        if rows.is_empty() {
            continue;
        }
        let guesses: Vec<P2> = rows.iter().map(|(_, r)| r.guess_xy()).collect();
        let g = density_heatmap(&guesses, &opts.bounds, nx, ny)?;
        let label = format!("guesses_{system}");
        b.put(
            &format!("heatmap_{label}.csv"),
            Some("heatmap"),
            &format!("Guess positions ({system})"),
            write_grid(&g, &label),
        )?;

        let samples: Vec<(P2, f64)> = rows
            .iter()
            .map(|(_, r)| {
                let at = match opts.attribution {
                    KnnAttribution::Source => r.target(),
                    KnnAttribution::Guess => r.guess_xy(),
                };
                (at, r.score)
            })
            .collect();
        let g = knn_score_map(&samples, opts.k, &opts.bounds, nx, ny)?;
        let label = format!("knn_{system}");
        b.put(
            &format!("{label}.csv"),
            Some("knn_map"),
            &format!("kNN score map ({system}, k={})", opts.k),
            write_grid(&g, &label),
        )?;
    }

    let mut pts = String::from("participant,system,order,score,slope,improving\n");
    for r in participant_slopes(sessions) {
        for (i, s) in r.scores.iter().enumerate() {
            let _ = writeln!(
                pts,
                "{},{},{i},{s},{},{}",
                r.participant, r.system, r.slope, r.improving
            );
        }
    }
    b.put(
        "learning.csv",
        Some("regression"),
        "Score over trials per participant",
        pts,
    )?;

    for (tracker, name, title) in [
        (
            Tracker::Hmd,
            "hmd",
            "Head distance to source over normalized time",
        ),
        (
            Tracker::RightHand,
            "right_hand",
            "Right-hand distance to source over normalized time",
        ),
    ] {
        let mut s = String::from("system,bin,t_norm,mean_distance,n_trials\n");
        for &system in System::ALL {
            let trials = sessions
                .iter()
                .flat_map(|s| s.trials.iter())
                .filter(|t| t.row.system == system);
            match normalized_time_curves(trials, tracker, opts.curve_bins) {
                Ok(curve) => {
                    for line in curve_table(&curve).lines().skip(1) {
                        let _ = writeln!(s, "{system},{line}");
                    }
                }
                Err(AnalysisError::InsufficientData(_)) => {}
                Err(e) => return Err(e),
            }
        }
        b.put(&format!("curves_{name}.csv"), Some("curves"), title, s)?;
    }

    let mut paths =
        String::from("participant,trial,system,t,x,y,target_x,target_y,guess_x,guess_y\n");
    for &system in System::ALL {
        for p in search_paths(sessions, system) {
            let _ = writeln!(
                paths,
                "{},{},{},{},{},{},{},{},{},{}",
                p.participant,
                p.trial,
                p.system,
                p.t,
                p.position.x,
                p.position.y,
                p.target.x,
                p.target.y,
                p.guess.x,
                p.guess.y
            );
        }
    }
    b.put(
        "paths.csv",
        Some("paths"),
        "Head paths, first static trial per system",
        paths,
    )?;

    let manifest = Manifest {
        version: 1,
        sessions: sessions.len(),
        trials: targets.len(),
        bounds: [
            opts.bounds.min.x,
            opts.bounds.min.y,
            opts.bounds.max.x,
            opts.bounds.max.y,
        ],
        bins: opts.bins,
        k: opts.k,
        knn_attribution: opts.attribution,
        entries: b.entries,
    };
    let path = dir.join(MANIFEST_FILE);
    fs::write(&path, serde_json::to_string_pretty(&manifest)? + "\n")?;
    Ok(path)
}
