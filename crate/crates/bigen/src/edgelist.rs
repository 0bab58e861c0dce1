//! Delimited user-item edge lists.
//!
//! One edge per line, `user<TAB>item` by default. Lines starting with `#`
//! and blank lines are skipped. User and item labels live in separate
//! spaces: the token `42` in the user column and `42` in the item column are
//! different nodes.

use std::collections::HashMap;
use std::io::{BufRead, Write};
use std::str::FromStr;

use bigen_core::{Bigraph, Modality};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Delimiter {
    Tab,
    Comma,
    Whitespace,
}

impl Delimiter {
    fn separator(self) -> &'static str {
        match self {
            Delimiter::Tab => "\t",
            Delimiter::Comma => ",",
            Delimiter::Whitespace => " ",
        }
    }
}

impl FromStr for Delimiter {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "tab" | "tsv" => Ok(Delimiter::Tab),
            "comma" | "csv" => Ok(Delimiter::Comma),
            "whitespace" | "ws" | "space" => Ok(Delimiter::Whitespace),
            other => Err(format!("unknown delimiter '{other}' (expected tab, comma or whitespace)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EdgeListFormat {
    pub delimiter: Delimiter,
    /// First non-comment line is a header.
    pub header: bool,
    pub user_column: usize,
    pub item_column: usize,
}

impl Default for EdgeListFormat {
    fn default() -> Self {
        EdgeListFormat { delimiter: Delimiter::Tab, header: false, user_column: 0, item_column: 1 }
    }
}

impl EdgeListFormat {
    pub fn with_delimiter(delimiter: Delimiter) -> Self {
        EdgeListFormat { delimiter, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.user_column == self.item_column {
            return Err(Error::Parse { line: 0, reason: "user and item columns must differ".into() });
        }
        Ok(())
    }
}

/// Dense index for each distinct label, in order of first appearance.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Labels {
    names: Vec<String>,
    index: HashMap<String, usize>,
}

impl Labels {
    fn intern(&mut self, token: &str) -> (usize, bool) {
        if let Some(&i) = self.index.get(token) {
            return (i, false);
        }
        let i = self.names.len();
        self.names.push(token.to_owned());
        self.index.insert(token.to_owned(), i);
        (i, true)
    }

    pub fn name(&self, index: usize) -> &str {
        &self.names[index]
    }

    pub fn get(&self, label: &str) -> Option<usize> {
        self.index.get(label).copied()
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }
}

#[derive(Debug, Clone)]
pub struct LoadedGraph {
    pub graph: Bigraph,
    pub users: Labels,
    pub items: Labels,
    /// Repeated edges that were collapsed.
    pub duplicates: usize,
}

/// Reads an edge list line by line. Repeated edges collapse into one and are
/// counted in [`LoadedGraph::duplicates`].
pub fn load_edge_list<R: BufRead>(source: R, fmt: &EdgeListFormat) -> Result<LoadedGraph> {
    fmt.validate()?;
    let mut graph = Bigraph::empty();
    let mut users = Labels::default();
    let mut items = Labels::default();
    let mut duplicates = 0;
    let mut header_pending = fmt.header;
    let needed = fmt.user_column.max(fmt.item_column) + 1;

    for (n, line) in source.lines().enumerate() {
        let line = line?;
        let line_no = n + 1;
        let trimmed = line.trim_end_matches('\r');
        if trimmed.trim().is_empty() || trimmed.starts_with('#') {
            continue;
        }
        if header_pending {
            header_pending = false;
            continue;
        }
        let fields: Vec<&str> = match fmt.delimiter {
            Delimiter::Whitespace => trimmed.split_whitespace().collect(),
            d => trimmed.split(d.separator()).map(str::trim).collect(),
        };
        if fields.len() < needed {
            return Err(Error::Parse {
                line: line_no,
                reason: format!("expected at least {needed} columns, found {}", fields.len()),
            });
        }
        let (user, item) = (fields[fmt.user_column], fields[fmt.item_column]);
        if user.is_empty() || item.is_empty() {
            return Err(Error::Parse { line: line_no, reason: "empty node label".into() });
        }
        let (u, new_user) = users.intern(user);
        if new_user {
            graph.add_node(Modality::User);
        }
        let (i, new_item) = items.intern(item);
        if new_item {
            graph.add_node(Modality::Item);
        }
        match graph.add_edge(u, i) {
            Ok(()) => {}
            Err(bigen_core::Error::DuplicateEdge { .. }) => duplicates += 1,
            Err(e) => return Err(e.into()),
        }
    }
    Ok(LoadedGraph { graph, users, items, duplicates })
}

/// Writes one line per edge, ordered by user index then item index. Without
/// labels, node indices are written.
pub fn save_edge_list<W: Write>(
    g: &Bigraph,
    labels: Option<(&Labels, &Labels)>,
    mut sink: W,
    fmt: &EdgeListFormat,
) -> Result<()> {
    fmt.validate()?;
    let sep = fmt.delimiter.separator();
    let user_first = fmt.user_column < fmt.item_column;
    if fmt.header {
        let (a, b) = if user_first { ("user", "item") } else { ("item", "user") };
        writeln!(sink, "{a}{sep}{b}")?;
    }
    for (u, i) in g.edges() {
        let (us, is) = match labels {
            Some((ul, il)) => (ul.name(u).to_owned(), il.name(i).to_owned()),
            None => (u.to_string(), i.to_string()),
        };
        if user_first {
            writeln!(sink, "{us}{sep}{is}")?;
        } else {
            writeln!(sink, "{is}{sep}{us}")?;
        }
    }
    sink.flush()?;
    Ok(())
}

pub fn edge_list_bytes(g: &Bigraph, fmt: &EdgeListFormat) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    save_edge_list(g, None, &mut out, fmt)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn load(text: &str, fmt: &EdgeListFormat) -> Result<LoadedGraph> {
        load_edge_list(text.as_bytes(), fmt)
    }

    #[test]
    fn three_lines() {
        let l = load("a\tx\na\ty\nb\tx\n", &EdgeListFormat::default()).unwrap();
        assert_eq!((l.graph.user_count(), l.graph.item_count(), l.graph.edge_count()), (2, 2, 3));
        assert_eq!(l.duplicates, 0);
        assert_eq!(l.users.get("b"), Some(1));
    }

    #[test]
    fn duplicates_collapse() {
        let l = load("a\tx\n# comment\n\na\tx\n", &EdgeListFormat::default()).unwrap();
        assert_eq!(l.graph.edge_count(), 1);
        assert_eq!(l.duplicates, 1);
    }

    #[test]
    fn shared_tokens_are_distinct_nodes() {
        let l = load("1\t1\n2\t1\n", &EdgeListFormat::default()).unwrap();
        assert_eq!((l.graph.user_count(), l.graph.item_count()), (2, 1));
    }

    #[test]
    fn malformed_line_reports_number() {
        let err = load("a\tx\n# c\nbroken\n", &EdgeListFormat::default()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
        let err = load("a\t\n", &EdgeListFormat::default()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }

    #[test]
    fn header_columns_and_delimiters() {
        let fmt = EdgeListFormat { delimiter: Delimiter::Comma, header: true, user_column: 2, item_column: 0 };
        let l = load("item,rating,user\nx,5,a\ny,3,a\n", &fmt).unwrap();
        assert_eq!((l.graph.user_count(), l.graph.item_count()), (1, 2));

        let fmt = EdgeListFormat::with_delimiter(Delimiter::Whitespace);
        let l = load("a   x 1\n b\tx\n", &fmt).unwrap();
        assert_eq!(l.graph.edge_count(), 2);

        let same = EdgeListFormat { user_column: 1, item_column: 1, ..Default::default() };
        assert!(load("a\tb\n", &same).is_err());
    }

    #[test]
    fn save_pairs() {
        let g = Bigraph::with_pairs(2).unwrap();
        let out = String::from_utf8(edge_list_bytes(&g, &EdgeListFormat::default()).unwrap()).unwrap();
        assert_eq!(out, "0\t0\n1\t1\n");
    }

    #[test]
    fn save_with_labels_and_header() {
        let l = load("b\ty\na\tx\nb\tx\n", &EdgeListFormat::default()).unwrap();
        let fmt = EdgeListFormat { delimiter: Delimiter::Comma, header: true, ..Default::default() };
        let mut out = Vec::new();
        save_edge_list(&l.graph, Some((&l.users, &l.items)), &mut out, &fmt).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "user,item\nb,y\nb,x\na,x\n");
    }
}
