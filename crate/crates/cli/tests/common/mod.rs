#![allow(dead_code)]

#[path = "../../../core/tests/common/mod.rs"]
pub mod fixtures;

use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use tabeval::io::{to_jsonl, DatasetRecord, PredictionRecord};
use tabeval::table::{ParseOptions, Table};

pub use fixtures::stub::StubServer;

pub fn gold_records() -> Vec<DatasetRecord> {
    fixtures::corpus_sources()
        .into_iter()
        .map(|(id, intent, table)| DatasetRecord {
            id,
            text: String::new(),
            intent,
            table,
        })
        .collect()
}

pub fn identical_preds(model: &str) -> Vec<PredictionRecord> {
    fixtures::corpus()
        .iter()
        .map(|(id, t)| PredictionRecord {
            id: id.clone(),
            model_id: model.into(),
            table: tabeval::render_markdown(t),
        })
        .collect()
}

pub fn write_jsonl<T: serde::Serialize>(dir: &Path, name: &str, records: &[T]) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, to_jsonl(records).unwrap()).unwrap();
    path
}

/// Reply a well-behaved model might give: one statement per non-empty cell.
pub fn fake_unroll_reply(prompt: &str) -> String {
    let md = &prompt[prompt.rfind("\nTable:\n").expect("prompt has a table") + 8..];
    let table = Table::parse_auto(md, "t")
        .unwrap_or_else(|_| tabeval::parse_markdown(md, "t", &ParseOptions::default()).unwrap());
    let mut out = String::from("Statements:\n");
    let mut n = 0;
    for (r, row) in table.rows().iter().enumerate() {
        for (c, cell) in row.iter().enumerate() {
            if cell.is_empty {
                continue;
            }
            n += 1;
            out += &format!(
                "{n}. Row {} has {} {}. [{}]\n",
                r + 1,
                table.column_headers()[c],
                cell.text,
                r + 1
            );
        }
    }
    if n == 0 {
        out += "1. The table has rows.\n";
    }
    out
}

/// Chat-completions stub that answers every prompt with [`fake_unroll_reply`].
pub fn llm_stub() -> StubServer {
    StubServer::start(|_, body| {
        let req: Value = serde_json::from_str(body).unwrap();
        let prompt = req["messages"][0]["content"].as_str().unwrap();
        (
            200,
            json!({"choices": [{"message": {"role": "assistant", "content": fake_unroll_reply(prompt)}}]}).to_string(),
        )
    })
}
