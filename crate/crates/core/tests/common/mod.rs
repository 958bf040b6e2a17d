#![allow(dead_code)]

use tabeval::table::{ParseOptions, Table};

pub const EXAMPLE1_MD: &str = "\
|Year|     Competition     |         Venue        |Position|Event|Notes|
|----|---------------------|----------------------|--------|-----|-----|
|1966|European Indoor Games|Dortmund, West Germany|  1st   |400 m| 47.9|
|1967|European Indoor Games|Prague, Czechoslovakia|  2nd   |400 m| 48.6|
";

pub const EXAMPLE2_MD: &str = "\
|Year|               Title                |        Role        |Notes|
|----|------------------------------------|--------------------|-----|
|2015|Kidnapped: The Hannah Anderson Story|   Becca McKinnon   | NaN |
|2015|       Jem and the Holograms        |Young Jerrica Benton| NaN |
|2015|             Asomatous              |    Sophie Gibbs    | NaN |
|2017|           Unforgettable            |         Lily       | NaN |
|2019|             Our Friend             |         Molly      | NaN |
";

pub const EXAMPLE1_RESPONSE: &str = "\
Statements:
1. European Indoor Games in 1966 occurred in Dortmund, West Germany.
2. 1st position was obtained in the 1966 European Indoor Games.
3. The 1966 European Indoor Games had a 400 m event.
4. 47.9 in the 1966 European Indoor Games.
5. European Indoor Games in 1967 occurred in Prague, Czechoslovakia.
6. 2nd position was obtained in the 1967 European Indoor Games.
7. The 1967 European Indoor Games had a 400 m event.
8. 48.6 in the 1967 European Indoor Games.

Rows:
1. | 1966 | European Indoor Games | Dortmund, West Germany | 1st | 400m | 47.9 |
2. | 1967 | European Indoor Games | Prague, Czechoslovakia | 2nd | 400m | 48.6 |
";

pub fn example1() -> Table {
    tabeval::parse_markdown(EXAMPLE1_MD, "Koch", &ParseOptions::default()).unwrap()
}

pub fn example2() -> Table {
    tabeval::parse_markdown(
        EXAMPLE2_MD,
        "Isabella Rice - Film",
        &ParseOptions::default(),
    )
    .unwrap()
}

/// (id, intent, source text). Markdown and HTML, including spanning cells.
pub fn corpus_sources() -> Vec<(String, String, String)> {
    let mut out: Vec<(&str, &str, String)> = vec![
        ("koch", "Koch", EXAMPLE1_MD.to_string()),
        ("rice", "Isabella Rice - Film", EXAMPLE2_MD.to_string()),
        (
            "planets",
            "Planets",
            "|Planet|Moons|Ring|\n|---|---|---|\n|Mercury|0|no|\n|Venus|0|no|\n|Earth|1|no|\n|Saturn|146|yes|\n".into(),
        ),
        (
            "no_key",
            "League results",
            "|Team|Season|Place|\n|---|---|---|\n|Ajax|2019|1|\n|Ajax|2020|2|\n|PSV|2019|2|\n|PSV|2020|1|\n".into(),
        ),
        (
            "duplicates",
            "Repeated rows",
            "|A|B|\n|---|---|\n|x|1|\n|x|1|\n|y|2|\n".into(),
        ),
        (
            "single_cell",
            "One value",
            "|Population|\n|---|\n|8,000,000|\n".into(),
        ),
        (
            "empties",
            "Sparse table",
            "|Name|Gold|Silver|Bronze|\n|---|---|---|---|\n|Ann|1|NaN|-|\n|Bob|n/a|2|3|\n|Cy||1|NaN|\n".into(),
        ),
        (
            "pipes",
            "Escaped pipes",
            "|Expr|Meaning|\n|---|---|\n|a \\| b|either|\n|a & b|both|\n".into(),
        ),
        (
            "unicode",
            "Städte",
            "|Stadt|Einwohner|Land|\n|---|---|---|\n|München|1.5 Mio|Bayern|\n|Köln|1.1 Mio|NRW|\n|Zürich|0.4 Mio|Schweiz|\n".into(),
        ),
        (
            "wide",
            "Quarterly figures",
            "|Region|Q1|Q2|Q3|Q4|Total|\n|---|---|---|---|---|---|\n|North|10|12|9|14|45|\n|South|8|8|11|7|34|\n".into(),
        ),
        (
            "three_key",
            "Schedule",
            "|Day|Room|Slot|Talk|\n|---|---|---|---|\n|Mon|A|1|Intro|\n|Mon|A|2|Intro|\n|Mon|B|1|Intro|\n|Tue|A|1|Intro|\n|Mon|B|2|Wrap|\n|Tue|A|2|Wrap|\n|Tue|B|1|Wrap|\n|Tue|B|2|Wrap|\n".into(),
        ),
        (
            "blank_header",
            "Unnamed column",
            "|Item||Price|\n|---|---|---|\n|Tea|hot|2|\n|Juice|cold|3|\n".into(),
        ),
        (
            "numbers",
            "Constants",
            "|Symbol|Value|Unit|\n|---|---|---|\n|c|299792458|m/s|\n|G|6.674e-11|N m2/kg2|\n|h|6.626e-34|J s|\n".into(),
        ),
    ];
    let html: Vec<(&str, &str, &str)> = vec![
        (
            "html_simple",
            "Capitals",
            "<table><tr><th>Country</th><th>Capital</th></tr><tr><td>France</td><td>Paris</td></tr><tr><td>Peru</td><td>Lima</td></tr></table>",
        ),
        (
            "html_rowspan",
            "Medals by year",
            "<table><thead><tr><th>Year</th><th>Event</th><th>Medal</th></tr></thead><tbody>\
             <tr><td rowspan=\"2\">2008</td><td>100 m</td><td>Gold</td></tr>\
             <tr><td>200 m</td><td>Silver</td></tr>\
             <tr><td>2012</td><td>100 m</td><td>Bronze</td></tr></tbody></table>",
        ),
        (
            "html_colspan_header",
            "Match scores",
            "<table><thead><tr><th rowspan=\"2\">Match</th><th colspan=\"2\">Score</th></tr>\
             <tr><th>Home</th><th>Away</th></tr></thead><tbody>\
             <tr><td>Final</td><td>2</td><td>1</td></tr>\
             <tr><td>Semi</td><td>0</td><td>0</td></tr></tbody></table>",
        ),
        (
            "html_colspan_body",
            "Opening hours",
            "<table><tr><th>Day</th><th>Open</th><th>Close</th></tr>\
             <tr><td>Mon</td><td>9</td><td>17</td></tr>\
             <tr><td>Sun</td><td colspan=\"2\">closed</td></tr></table>",
        ),
        (
            "html_both_spans",
            "Course grid",
            "<table><tr><th>Term</th><th>Course</th><th>Credits</th><th>Room</th></tr>\
             <tr><td rowspan=\"3\">Fall</td><td>Algebra</td><td rowspan=\"2\">5</td><td>101</td></tr>\
             <tr><td>Biology</td><td>102</td></tr>\
             <tr><td colspan=\"2\">Seminar</td><td>103</td></tr>\
             <tr><td>Spring</td><td>Chemistry</td><td>4</td><td>104</td></tr></table>",
        ),
        (
            "html_caption",
            "",
            "<table><caption>Bridge lengths</caption><tr><th>Bridge</th><th>Length</th></tr>\
             <tr><td>Golden Gate</td><td>2737 m</td></tr><tr><td>Tower</td><td>244 m</td></tr></table>",
        ),
        (
            "html_markup_cells",
            "Authors",
            "<table><tr><th>Author</th><th>Books</th></tr>\
             <tr><td><b>Austen</b></td><td>Emma<br>Persuasion</td></tr>\
             <tr><td><a href=\"#\">Eliot</a></td><td><p>Middlemarch</p></td></tr></table>",
        ),
        (
            "html_rowspan_to_end",
            "Shared host",
            "<table><tr><th>Host</th><th>Edition</th></tr>\
             <tr><td rowspan=\"0\">Oslo</td><td>1st</td></tr><tr><td>2nd</td></tr><tr><td>3rd</td></tr></table>",
        ),
        (
            "html_tfoot",
            "Budget",
            "<table><thead><tr><th>Line</th><th>Amount</th></tr></thead>\
             <tbody><tr><td>Staff</td><td>100</td></tr><tr><td>Travel</td><td>20</td></tr></tbody>\
             <tfoot><tr><td>Total</td><td>120</td></tr></tfoot></table>",
        ),
    ];
    let mut all: Vec<(String, String, String)> = out
        .drain(..)
        .map(|(a, b, c)| (a.to_string(), b.to_string(), c))
        .collect();
    all.extend(
        html.into_iter()
            .map(|(a, b, c)| (a.to_string(), b.to_string(), c.to_string())),
    );
    all
}

pub fn corpus() -> Vec<(String, Table)> {
    corpus_sources()
        .into_iter()
        .map(|(id, intent, src)| {
            let t = Table::parse_auto(&src, &intent)
                .unwrap_or_else(|e| panic!("fixture {id} does not parse: {e}"));
            (id, t)
        })
        .collect()
}

pub mod strategies {
    use proptest::prelude::*;
    use tabeval::Table;

    /// Small alphabet so that duplicate values and anchor collisions are common.
    pub fn value() -> impl Strategy<Value = String> {
        prop_oneof![
            4 => prop::sample::select(vec!["a", "b", "c", "10", "x y", "Red", "2015"]).prop_map(String::from),
            1 => Just(String::new()),
            1 => "[A-Za-z0-9]{1,6}",
        ]
    }

    pub fn table(max_rows: usize, max_cols: usize) -> impl Strategy<Value = Table> {
        (1..=max_cols, 0..=max_rows).prop_flat_map(|(cols, rows)| {
            (
                prop::collection::vec("[A-Z][a-z]{0,5}", cols),
                prop::collection::vec(prop::collection::vec(value(), cols), rows),
                prop::sample::select(vec!["", "Results", "Koch"]),
            )
                .prop_map(|(headers, rows, intent)| {
                    Table::from_strings(intent, headers, rows).unwrap()
                })
        })
    }

    pub fn nonempty_table(max_rows: usize, max_cols: usize) -> impl Strategy<Value = Table> {
        table(max_rows, max_cols).prop_filter("needs a row", |t| t.n_rows() > 0)
    }
}

pub mod stub {
    use std::sync::atomic::{AtomicUsize, Ordering};
    use std::sync::{Arc, Mutex};
    use std::thread;

    pub type Handler = dyn Fn(&str, &str) -> (u16, String) + Send + Sync;

    /// Local HTTP server answering every request through `handler(path, body)`.
    pub struct StubServer {
        pub url: String,
        pub hits: Arc<AtomicUsize>,
        pub bodies: Arc<Mutex<Vec<String>>>,
        server: Arc<tiny_http::Server>,
        worker: Option<thread::JoinHandle<()>>,
    }

    impl StubServer {
        pub fn start(
            handler: impl Fn(&str, &str) -> (u16, String) + Send + Sync + 'static,
        ) -> Self {
            let server = Arc::new(tiny_http::Server::http("127.0.0.1:0").unwrap());
            let port = server.server_addr().to_ip().unwrap().port();
            let hits = Arc::new(AtomicUsize::new(0));
            let bodies = Arc::new(Mutex::new(Vec::new()));
            let handler: Arc<Handler> = Arc::new(handler);
            let worker = {
                let (server, hits, bodies) = (server.clone(), hits.clone(), bodies.clone());
                thread::spawn(move || {
                    for mut req in server.incoming_requests() {
                        hits.fetch_add(1, Ordering::SeqCst);
                        let mut body = String::new();
                        req.as_reader().read_to_string(&mut body).unwrap();
                        bodies.lock().unwrap().push(body.clone());
                        let (status, reply) = handler(req.url(), &body);
                        let resp = tiny_http::Response::from_string(reply)
                            .with_status_code(status)
                            .with_header(
                                "Content-Type: application/json"
                                    .parse::<tiny_http::Header>()
                                    .unwrap(),
                            );
                        let _ = req.respond(resp);
                    }
                })
            };
            Self {
                url: format!("http://127.0.0.1:{port}"),
                hits,
                bodies,
                server,
                worker: Some(worker),
            }
        }

        pub fn hits(&self) -> usize {
            self.hits.load(Ordering::SeqCst)
        }
    }

    impl Drop for StubServer {
        fn drop(&mut self) {
            self.server.unblock();
            if let Some(w) = self.worker.take() {
                let _ = w.join();
            }
        }
    }
}
