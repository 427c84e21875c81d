//! Text formats: edge lists, walk corpora, word2vec-style embeddings, label
//! tables, pair lists and score tables.

use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use biasedwalk_core::eval::{F1Scores, LabeledDataset};
use biasedwalk_core::graph::NodeId;
use biasedwalk_core::{Corpus, EmbeddingModel, Graph, GraphBuilder};

use crate::error::{Error, ParseError, Result};

pub fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| Error::io(path, e))
}

pub fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

/// Writes through `f` into a new file at `path`.
pub fn write_file<F>(path: &Path, f: F) -> Result<()>
where
    F: FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
{
    let mut w = create(path)?;
    f(&mut w).and_then(|_| w.flush()).map_err(|e| Error::io(path, e))
}

// Lines with their 1-based numbers, blank and '#' lines skipped.
fn content_lines<R: BufRead>(reader: R) -> impl Iterator<Item = (usize, std::io::Result<String>)> {
    reader.lines().enumerate().map(|(i, l)| (i + 1, l)).filter(|(_, l)| match l {
        Ok(s) => {
            let t = s.trim_start();
            !t.is_empty() && !t.starts_with('#')
        }
        Err(_) => true,
    })
}

fn read_error(line: usize, e: std::io::Error) -> ParseError {
    ParseError::new(line, format!("read failed: {e}"))
}

/// Parses `src dst [weight]` lines. Node ids follow first appearance.
pub fn read_edge_list<R: BufRead>(reader: R, directed: bool, weighted: bool) -> Result<Graph, ParseError> {
    let mut b = GraphBuilder::new(directed, weighted);
    for (no, line) in content_lines(reader) {
        let line = line.map_err(|e| read_error(no, e))?;
        let fields: Vec<&str> = line.split_whitespace().collect();
        let weight = match fields.len() {
            2 => 1.0,
            3 => fields[2]
                .parse::<f64>()
                .map_err(|_| ParseError::new(no, format!("weight {:?} is not a number", fields[2])))?,
            n => return Err(ParseError::new(no, format!("expected 2 or 3 fields, found {n}"))),
        };
        b.add_named_edge(fields[0], fields[1], weight).map_err(|e| ParseError::new(no, e.to_string()))?;
    }
    Ok(b.build())
}

pub fn load_graph(path: &Path, directed: bool, weighted: bool) -> Result<Graph> {
    let g = read_edge_list(open(path)?, directed, weighted).map_err(|e| e.in_file(path))?;
    log::info!(
        "loaded {}: {} nodes, {} edges, {}",
        path.display(),
        g.node_count(),
        g.edge_count(),
        if directed { "directed" } else { "undirected" }
    );
    Ok(g)
}

/// Writes every edge once. The line order is chosen so that reading the file
/// back assigns the same node ids; isolated nodes cannot be represented.
/// Weights are written only when some weight differs from 1.
pub fn write_edge_list<W: Write>(g: &Graph, w: &mut W) -> std::io::Result<()> {
    let with_weights = g.edges().any(|(_, _, wt)| wt != 1.0);
    let line = |w: &mut W, u: NodeId, v: NodeId, wt: f64| {
        if with_weights {
            writeln!(w, "{} {} {}", g.name(u), g.name(v), wt)
        } else {
            writeln!(w, "{} {}", g.name(u), g.name(v))
        }
    };
    let mut used = HashSet::new();
    let mut introduced = 0;
    for v in 0..g.node_count() {
        if v < introduced {
            continue;
        }
        let back = g
            .out_arcs(v)
            .iter()
            .map(|a| (v, a.node, a.weight))
            .chain(g.in_arcs(v).iter().map(|a| (a.node, v, a.weight)))
            .find(|&(a, b, _)| a.min(b) < introduced);
        if let Some((a, b, wt)) = back {
            let (a, b) = if g.is_directed() { (a, b) } else { (a.min(b), a.max(b)) };
            line(w, a, b, wt)?;
            used.insert(key(g, a, b));
            introduced = v + 1;
        } else if let Some(wt) = g.arc_weight(v, v + 1).filter(|_| v + 1 < g.node_count()) {
            line(w, v, v + 1, wt)?;
            used.insert(key(g, v, v + 1));
            introduced = v + 2;
        } else {
            log::warn!("node {} has no edges and is not written", g.name(v));
        }
    }
    for (u, v, wt) in g.edges() {
        if !used.contains(&(u, v)) {
            line(w, u, v, wt)?;
        }
    }
    Ok(())
}

fn key(g: &Graph, a: NodeId, b: NodeId) -> (NodeId, NodeId) {
    if g.is_directed() {
        (a, b)
    } else {
        (a.min(b), a.max(b))
    }
}

pub fn save_graph(g: &Graph, path: &Path) -> Result<()> {
    write_file(path, |w| write_edge_list(g, w))
}

/// One walk per line, tokens separated by single spaces.
pub fn write_corpus<W: Write>(corpus: &Corpus, w: &mut W) -> std::io::Result<()> {
    let tokens = corpus.tokens();
    for walk in corpus.walks() {
        for (i, &n) in walk.iter().enumerate() {
            if i > 0 {
                w.write_all(b" ")?;
            }
            w.write_all(tokens[n as usize].as_bytes())?;
        }
        w.write_all(b"\n")?;
    }
    Ok(())
}

/// Reads a corpus written by [`write_corpus`]; tokens are interned in order
/// of first appearance. Blank lines are skipped.
pub fn read_corpus<R: BufRead>(reader: R) -> Result<Corpus, ParseError> {
    let mut index: HashMap<String, NodeId> = HashMap::new();
    let mut tokens = Vec::new();
    let mut walks = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| read_error(i + 1, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let walk: Vec<NodeId> = line
            .split_whitespace()
            .map(|t| {
                *index.entry(t.to_string()).or_insert_with(|| {
                    tokens.push(t.to_string());
                    tokens.len() - 1
                })
            })
            .collect();
        walks.push(walk);
    }
    Corpus::from_walks(tokens, walks).map_err(|e| ParseError::new(0, e.to_string()))
}

/// Header `|V| d`, then one line per token with its target vector. Values use
/// the shortest decimal form that reads back to the same `f64`.
pub fn write_embeddings<W: Write>(model: &EmbeddingModel, w: &mut W) -> std::io::Result<()> {
    writeln!(w, "{} {}", model.len(), model.dim())?;
    for (row, token) in model.tokens().iter().enumerate() {
        w.write_all(token.as_bytes())?;
        for x in model.target_row(row) {
            write!(w, " {x}")?;
        }
        w.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_embeddings<R: Read>(reader: R) -> Result<EmbeddingModel, ParseError> {
    let mut lines = BufReader::new(reader).lines();
    let header = match lines.next() {
        Some(l) => l.map_err(|e| read_error(1, e))?,
        None => return Err(ParseError::new(1, "missing header")),
    };
    let parse_usize = |s: Option<&str>| s.and_then(|s| s.parse::<usize>().ok());
    let mut h = header.split_whitespace();
    let (n, d) = match (parse_usize(h.next()), parse_usize(h.next()), h.next()) {
        (Some(n), Some(d), None) if d > 0 => (n, d),
        _ => return Err(ParseError::new(1, format!("header must be \"<count> <dimension>\", found {header:?}"))),
    };
    let mut tokens = Vec::with_capacity(n);
    let mut target = Vec::with_capacity(n * d);
    for row in 0..n {
        let no = row + 2;
        let line = match lines.next() {
            Some(l) => l.map_err(|e| read_error(no, e))?,
            None => return Err(ParseError::new(no, format!("row {} missing: file ends after {row} of {n} rows", row + 1))),
        };
        let mut fields = line.split_whitespace();
        let token = fields.next().ok_or_else(|| ParseError::new(no, format!("row {} is empty", row + 1)))?;
        let before = target.len();
        for f in fields {
            let x: f64 = f
                .parse()
                .map_err(|_| ParseError::new(no, format!("row {}: {f:?} is not a number", row + 1)))?;
            if !x.is_finite() {
                return Err(ParseError::new(no, format!("row {}: non-finite value {f}", row + 1)));
            }
            target.push(x);
        }
        if target.len() - before != d {
            return Err(ParseError::new(
                no,
                format!("row {} has {} values, expected {d}", row + 1, target.len() - before),
            ));
        }
        tokens.push(token.to_string());
    }
    for (extra, line) in lines.enumerate() {
        let line = line.map_err(|e| read_error(n + 2 + extra, e))?;
        if !line.trim().is_empty() {
            return Err(ParseError::new(n + 2 + extra, format!("more rows than the {n} declared")));
        }
    }
    let context = vec![0.0; target.len()];
    EmbeddingModel::from_matrices(tokens, d, target, context).map_err(|e| ParseError::new(0, e.to_string()))
}

pub fn save_embeddings(model: &EmbeddingModel, path: &Path) -> Result<()> {
    write_file(path, |w| write_embeddings(model, w))
}

pub fn load_embeddings(path: &Path) -> Result<EmbeddingModel> {
    read_embeddings(open(path)?).map_err(|e| e.in_file(path).into())
}

/// Lines `token<TAB>l1,l2,...`. When every label is a non-negative integer,
/// label ids follow numeric order; otherwise they follow first appearance.
pub fn read_labels<R: BufRead>(reader: R) -> Result<LabeledDataset, ParseError> {
    let mut rows: Vec<(usize, String, Vec<String>)> = Vec::new();
    let mut seen = HashSet::new();
    for (no, line) in content_lines(reader) {
        let line = line.map_err(|e| read_error(no, e))?;
        let line = line.trim_end_matches(['\r', '\n']);
        let (token, rest) = match line.split_once('\t') {
            Some((t, r)) => (t.trim(), r.trim()),
            None => {
                let mut it = line.splitn(2, char::is_whitespace);
                (it.next().unwrap_or("").trim(), it.next().unwrap_or("").trim())
            }
        };
        if token.is_empty() {
            return Err(ParseError::new(no, "missing node token"));
        }
        if !seen.insert(token.to_string()) {
            return Err(ParseError::new(no, format!("node {token:?} is listed twice")));
        }
        let labels: Vec<String> = rest
            .split(',')
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .map(str::to_string)
            .collect();
        rows.push((no, token.to_string(), labels));
    }
    let numeric = rows.iter().flat_map(|r| &r.2).all(|l| l.parse::<u64>().is_ok());
    let mut label_names: Vec<String> = Vec::new();
    if numeric {
        let mut values: Vec<u64> = rows.iter().flat_map(|r| &r.2).map(|l| l.parse().unwrap()).collect();
        values.sort_unstable();
        values.dedup();
        label_names = values.iter().map(u64::to_string).collect();
    } else {
        for l in rows.iter().flat_map(|r| &r.2) {
            if !label_names.contains(l) {
                label_names.push(l.clone());
            }
        }
    }
    let id_of: HashMap<String, usize> = label_names.iter().enumerate().map(|(i, l)| (l.clone(), i)).collect();
    let mut data = LabeledDataset { label_names, ..Default::default() };
    for (_, token, labels) in rows {
        let key = |l: &String| if numeric { l.parse::<u64>().unwrap().to_string() } else { l.clone() };
        let mut ids: Vec<usize> = labels.iter().map(|l| id_of[&key(l)]).collect();
        ids.sort_unstable();
        ids.dedup();
        data.nodes.push(token);
        data.labels.push(ids);
    }
    Ok(data)
}

pub fn load_labels(path: &Path) -> Result<LabeledDataset> {
    read_labels(open(path)?).map_err(|e| e.in_file(path).into())
}

/// Node pairs in edge-list format.
pub fn write_pairs<W: Write>(names: &[String], pairs: &[(NodeId, NodeId)], w: &mut W) -> std::io::Result<()> {
    for &(u, v) in pairs {
        writeln!(w, "{} {}", names[u], names[v])?;
    }
    Ok(())
}

/// One row of a score table.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreRow {
    pub setting: String,
    pub fold: usize,
    pub scores: F1Scores,
}

pub const SCORE_HEADER: &str = "setting,fold,macro_f1,micro_f1";

pub fn write_scores<W: Write>(rows: &[ScoreRow], w: &mut W) -> std::io::Result<()> {
    writeln!(w, "{SCORE_HEADER}")?;
    for r in rows {
        writeln!(w, "{},{},{},{}", r.setting, r.fold, r.scores.macro_f1, r.scores.micro_f1)?;
    }
    Ok(())
}
