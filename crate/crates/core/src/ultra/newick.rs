//! Newick text for dendrograms. Branch lengths are height differences, so
//! every leaf sits at depth equal to the root height.

use super::{Dendrogram, Ultrametric};
use crate::error::{Error, Result};

/// Leaves are named by `labels[i]`, or by their index when `labels` is None.
pub fn to_newick(d: &Dendrogram, labels: Option<&[String]>) -> String {
    let mut out = String::new();
    write_node(d, d.root, labels, &mut out);
    out.push(';');
    out
}

fn write_node(d: &Dendrogram, node: usize, labels: Option<&[String]>, out: &mut String) {
    let nd = &d.nodes[node];
    if let Some(l) = nd.leaf {
        match labels {
            Some(names) => out.push_str(&names[l]),
            None => out.push_str(&l.to_string()),
        }
        return;
    }
    out.push('(');
    for (k, &c) in nd.children.iter().enumerate() {
        if k > 0 {
            out.push(',');
        }
        write_node(d, c, labels, out);
        out.push(':');
        out.push_str(&(nd.height - d.nodes[c].height).to_string());
    }
    out.push(')');
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
    labels: Vec<String>,
}

/// Subtree as (leaf ids below, height).
struct Parsed {
    leaves: Vec<usize>,
    height: f64,
    merges: Vec<(Vec<Vec<usize>>, f64)>,
}

impl Parser<'_> {
    fn err(&self, msg: &str) -> Error {
        Error::Parse {
            line: 1 + self.s[..self.pos].iter().filter(|&&c| c == b'\n').count(),
            message: format!("newick: {msg} at byte {}", self.pos),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.s.get(self.pos).copied()
    }

    fn token(&mut self) -> String {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.s.len() && !b"(),:;".contains(&self.s[self.pos]) && !self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        String::from_utf8_lossy(&self.s[start..self.pos]).into_owned()
    }

    fn length(&mut self) -> Result<f64> {
        if self.peek() != Some(b':') {
            return Ok(0.0);
        }
        self.pos += 1;
        let t = self.token();
        match t.parse::<f64>() {
            Ok(x) if x.is_finite() && x >= 0.0 => Ok(x),
            _ => Err(self.err(&format!("bad branch length '{t}'"))),
        }
    }

    fn subtree(&mut self) -> Result<Parsed> {
        if self.peek() != Some(b'(') {
            let name = self.token();
            if name.is_empty() {
                return Err(self.err("expected a leaf name"));
            }
            self.labels.push(name);
            return Ok(Parsed {
                leaves: vec![self.labels.len() - 1],
                height: 0.0,
                merges: Vec::new(),
            });
        }
        self.pos += 1;
        let mut kids: Vec<(Parsed, f64)> = Vec::new();
        loop {
            let child = self.subtree()?;
            let len = self.length()?;
            kids.push((child, len));
            match self.peek() {
                Some(b',') => self.pos += 1,
                Some(b')') => {
                    self.pos += 1;
                    break;
                }
                _ => return Err(self.err("expected ',' or ')'")),
            }
        }
        // internal node names are ignored
        self.token();
        let height = kids
            .iter()
            .map(|(c, l)| c.height + l)
            .fold(0.0f64, f64::max);
        for (c, l) in &kids {
            let h = c.height + l;
            if (h - height).abs() > 1e-9 * height.max(1.0) {
                return Err(self.err(&format!(
                    "tree is not ultrametric: leaf depths {h} and {height} under one node"
                )));
            }
        }
        let mut leaves = Vec::new();
        let mut merges = Vec::new();
        let mut groups = Vec::new();
        for (c, _) in kids {
            leaves.extend(&c.leaves);
            groups.push(c.leaves);
            merges.extend(c.merges);
        }
        merges.push((groups, height));
        Ok(Parsed {
            leaves,
            height,
            merges,
        })
    }
}

/// Reads a dendrogram and returns its ultrametric together with the leaf
/// names in order of appearance.
pub fn parse_newick(text: &str) -> Result<(Ultrametric, Vec<String>)> {
    let mut p = Parser {
        s: text.as_bytes(),
        pos: 0,
        labels: Vec::new(),
    };
    let tree = p.subtree()?;
    p.length()?;
    if p.peek() != Some(b';') {
        return Err(p.err("expected ';'"));
    }
    p.pos += 1;
    if p.peek().is_some() {
        return Err(p.err("trailing text after ';'"));
    }
    let n = tree.leaves.len();
    let mut d = vec![vec![0.0; n]; n];
    for (groups, h) in &tree.merges {
        for (gi, a) in groups.iter().enumerate() {
            for b in &groups[gi + 1..] {
                for &i in a {
                    for &j in b {
                        d[i][j] = *h;
                        d[j][i] = *h;
                    }
                }
            }
        }
    }
    Ok((Ultrametric::new_unchecked(d), p.labels))
}
