use scraper::{ElementRef, Html, Node, Selector};

use super::{normalize_text, Cell, ParseOptions, SourceFormat, Table, TableError, HEADER_JOIN};

const MAX_COLSPAN: usize = 1000;
const MAX_ROWSPAN: usize = 65534;

struct RawCell {
    text: String,
    is_header: bool,
    rowspan: usize,
    colspan: usize,
}

struct RawRow {
    cells: Vec<RawCell>,
    in_thead: bool,
}

/// Parses a single HTML table (table/thead/tbody/tfoot/tr/th/td subset).
///
/// Row and column spans are expanded by copying the spanned value into every
/// covered position. Header rows are the `<thead>` rows, else the leading rows
/// made only of `<th>` cells, else the first row. Stacked header rows are
/// flattened per column with [`HEADER_JOIN`]. When `intent` is blank the
/// table's `<caption>` is used instead.
pub fn parse_html(text: &str, intent: &str, opts: &ParseOptions) -> Result<Table, TableError> {
    let doc = Html::parse_document(text);
    let table_sel = Selector::parse("table").expect("static selector");
    let tables: Vec<ElementRef> = doc.select(&table_sel).collect();
    let table = *tables
        .first()
        .ok_or_else(|| TableError::Malformed("no <table> element".into()))?;
    if tables.iter().any(|t| has_ancestor(*t, "table")) {
        return Err(TableError::Malformed(
            "nested tables are not supported".into(),
        ));
    }
    if tables.len() > 1 {
        log::warn!(
            "input has {} tables; only the first is parsed",
            tables.len()
        );
    }

    let mut caption = String::new();
    let rows = collect_rows(table, &mut caption);
    let grid = expand_spans(&rows)?;
    if grid.is_empty() {
        return Err(TableError::Malformed("table has no rows".into()));
    }

    let header_count = header_row_count(&rows);
    let width = grid.iter().map(Vec::len).max().unwrap_or(0);
    if width == 0 {
        return Err(TableError::Malformed("table has no cells".into()));
    }

    let headers: Vec<String> = (0..width)
        .map(|col| {
            let mut labels: Vec<&str> = Vec::new();
            for row in &grid[..header_count] {
                if let Some(Some(label)) = row.get(col) {
                    if !label.is_empty() && labels.last() != Some(&label.as_str()) {
                        labels.push(label);
                    }
                }
            }
            labels.join(HEADER_JOIN)
        })
        .collect();
    if headers.iter().all(String::is_empty) {
        return Err(TableError::Malformed("header row is empty".into()));
    }

    let body = grid[header_count..]
        .iter()
        .map(|row| {
            (0..width)
                .map(|col| match row.get(col) {
                    Some(Some(text)) => opts.cell(text),
                    _ => Cell::empty(),
                })
                .collect()
        })
        .collect();

    let intent = if normalize_text(intent).is_empty() {
        caption
    } else {
        intent.to_string()
    };
    Table::new(intent, headers, body, SourceFormat::Html)
}

fn element_name(node: &Node) -> Option<&str> {
    node.as_element().map(|e| e.name())
}

fn has_ancestor(el: ElementRef, name: &str) -> bool {
    el.ancestors()
        .any(|a| element_name(a.value()).is_some_and(|n| n == name))
}

/// Walks the table in document order, skipping nothing but nested tables
/// (already rejected by the caller).
fn collect_rows(table: ElementRef, caption: &mut String) -> Vec<RawRow> {
    let mut rows = Vec::new();
    for child in table.children().filter_map(ElementRef::wrap) {
        match child.value().name() {
            "caption" => *caption = cell_text(child),
            "thead" | "tbody" | "tfoot" => {
                let in_thead = child.value().name() == "thead";
                for tr in child.children().filter_map(ElementRef::wrap) {
                    if tr.value().name() == "tr" {
                        rows.push(read_row(tr, in_thead));
                    }
                }
            }
            "tr" => rows.push(read_row(child, false)),
            _ => {}
        }
    }
    rows
}

fn read_row(tr: ElementRef, in_thead: bool) -> RawRow {
    let cells = tr
        .children()
        .filter_map(ElementRef::wrap)
        .filter(|c| matches!(c.value().name(), "td" | "th"))
        .map(|c| RawCell {
            text: cell_text(c),
            is_header: c.value().name() == "th",
            rowspan: span_attr(c, "rowspan", MAX_ROWSPAN),
            colspan: span_attr(c, "colspan", MAX_COLSPAN).max(1),
        })
        .collect();
    RawRow { cells, in_thead }
}

/// Missing or unparsable spans count as 1. A rowspan of 0 is returned as 0
/// and means "to the end of the table".
fn span_attr(el: ElementRef, name: &str, cap: usize) -> usize {
    el.value()
        .attr(name)
        .and_then(|v| v.trim().parse::<usize>().ok())
        .map(|v| v.min(cap))
        .unwrap_or(1)
}

/// Text content with block-level boundaries turned into spaces.
fn cell_text(el: ElementRef) -> String {
    fn walk(node: ego_tree::NodeRef<'_, Node>, out: &mut String) {
        for child in node.children() {
            match child.value() {
                Node::Text(t) => out.push_str(&t.text),
                Node::Element(e) => {
                    let block = matches!(e.name(), "br" | "p" | "div" | "li" | "ul" | "ol");
                    if block {
                        out.push(' ');
                    }
                    walk(child, out);
                    if block {
                        out.push(' ');
                    }
                }
                _ => {}
            }
        }
    }
    let mut out = String::new();
    walk(*el, &mut out);
    normalize_text(&out)
}

/// Lays the raw rows onto a grid. `None` marks positions no cell covers.
fn expand_spans(rows: &[RawRow]) -> Result<Vec<Vec<Option<String>>>, TableError> {
    let n_rows = rows.len();
    let mut grid: Vec<Vec<Option<String>>> = vec![Vec::new(); n_rows];
    for (r, row) in rows.iter().enumerate() {
        let mut col = 0;
        for cell in &row.cells {
            while grid[r].get(col).is_some_and(Option::is_some) {
                col += 1;
            }
            let rowspan = if cell.rowspan == 0 {
                n_rows - r
            } else {
                cell.rowspan.min(n_rows - r)
            };
            for dr in 0..rowspan {
                let target = &mut grid[r + dr];
                if target.len() < col + cell.colspan {
                    target.resize(col + cell.colspan, None);
                }
                for slot in &mut target[col..col + cell.colspan] {
                    if slot.is_some() {
                        return Err(TableError::Malformed(format!(
                            "overlapping spans at row {}, column {}",
                            r + dr,
                            col
                        )));
                    }
                    *slot = Some(cell.text.clone());
                }
            }
            col += cell.colspan;
        }
    }
    Ok(grid)
}

fn header_row_count(rows: &[RawRow]) -> usize {
    let thead = rows.iter().take_while(|r| r.in_thead).count();
    if thead > 0 {
        return thead;
    }
    let th_rows = rows
        .iter()
        .take_while(|r| !r.cells.is_empty() && r.cells.iter().all(|c| c.is_header))
        .count();
    th_rows.max(1).min(rows.len())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<Table, TableError> {
        parse_html(text, "t", &ParseOptions::default())
    }

    #[test]
    fn minimal_table() {
        let t = parse("<table><tr><th>h</th></tr><tr><td>v</td></tr></table>").unwrap();
        assert_eq!(t.column_headers(), ["h"]);
        assert_eq!(t.n_rows(), 1);
        assert_eq!(t.cell(0, 0).text, "v");
        assert_eq!(t.source_format, SourceFormat::Html);
    }

    #[test]
    fn rowspan_duplicates_value() {
        let t = parse(
            "<table><tr><th>k</th><th>v</th></tr>\
             <tr><td rowspan=\"2\">A</td><td>1</td></tr>\
             <tr><td>2</td></tr></table>",
        )
        .unwrap();
        assert_eq!(t.n_rows(), 2);
        assert_eq!(t.cell(0, 0).text, "A");
        assert_eq!(t.cell(1, 0).text, "A");
        assert_eq!(t.cell(1, 1).text, "2");
    }

    #[test]
    fn stacked_headers_flatten() {
        let t = parse(
            "<table><thead>\
             <tr><th colspan=\"2\">Score</th></tr>\
             <tr><th>Home</th><th>Away</th></tr>\
             </thead><tbody><tr><td>1</td><td>2</td></tr></tbody></table>",
        )
        .unwrap();
        assert_eq!(t.column_headers(), ["Score — Home", "Score — Away"]);
    }

    #[test]
    fn rowspan_header_is_not_repeated() {
        let t = parse(
            "<table>\
             <tr><th rowspan=\"2\">Team</th><th colspan=\"2\">Score</th></tr>\
             <tr><th>Home</th><th>Away</th></tr>\
             <tr><td>X</td><td>1</td><td>2</td></tr></table>",
        )
        .unwrap();
        assert_eq!(t.column_headers(), ["Team", "Score — Home", "Score — Away"]);
        assert_eq!(t.n_rows(), 1);
    }

    #[test]
    fn first_row_is_header_without_markup() {
        let t = parse("<table><tr><td>a</td><td>b</td></tr><tr><td>1</td><td>2</td></tr></table>")
            .unwrap();
        assert_eq!(t.column_headers(), ["a", "b"]);
        assert_eq!(t.n_rows(), 1);
    }

    #[test]
    fn inner_markup_is_stripped() {
        let t = parse(
            "<table><tr><th>a</th></tr><tr><td><b>bold</b> and <a href='x'>link</a><br>next&amp;</td></tr></table>",
        )
        .unwrap();
        assert_eq!(t.cell(0, 0).text, "bold and link next&");
    }

    #[test]
    fn caption_fills_missing_intent() {
        let t = parse_html(
            "<table><caption> Medal  table </caption><tr><th>a</th></tr><tr><td>1</td></tr></table>",
            "",
            &ParseOptions::default(),
        )
        .unwrap();
        assert_eq!(t.intent, "Medal table");
    }

    #[test]
    fn short_rows_padded() {
        let t = parse("<table><tr><th>a</th><th>b</th></tr><tr><td>1</td></tr></table>").unwrap();
        assert!(t.cell(0, 1).is_empty);
    }

    #[test]
    fn errors() {
        assert!(matches!(
            parse("<p>nothing</p>"),
            Err(TableError::Malformed(_))
        ));
        let nested = "<table><tr><th>a</th></tr><tr><td><table><tr><td>x</td></tr></table></td></tr></table>";
        assert!(parse(nested).unwrap_err().to_string().contains("nested"));
        let overlap = "<table><tr><th>a</th><th>b</th><th>c</th></tr>\
             <tr><td>1</td><td rowspan=\"2\">2</td><td>3</td></tr>\
             <tr><td colspan=\"2\">4</td><td>5</td></tr></table>";
        assert!(parse(overlap)
            .unwrap_err()
            .to_string()
            .contains("overlapping"));
    }

    #[test]
    fn span_conservation() {
        let t = parse(
            "<table><tr><th>a</th><th>b</th><th>c</th></tr>\
             <tr><td rowspan=\"2\" colspan=\"2\">X</td><td>1</td></tr>\
             <tr><td>2</td></tr>\
             <tr><td>p</td><td>q</td><td>r</td></tr></table>",
        )
        .unwrap();
        assert_eq!(t.n_rows(), 3);
        let filled: usize = t
            .rows()
            .iter()
            .map(|r| r.iter().filter(|c| !c.is_empty).count())
            .sum();
        assert_eq!(filled, t.n_rows() * t.n_cols());
        assert_eq!(t.cell(1, 1).text, "X");
        assert_eq!(t.cell(1, 2).text, "2");
    }
}
