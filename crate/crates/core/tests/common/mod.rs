#![allow(dead_code)]

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Write};
use std::net::TcpStream;
use std::path::PathBuf;

use rand::Rng;
use ruleml::miner::FrequentItemSet;
use ruleml::model::{row_to_itemset, AttributeSchema, Dataset, ItemSet, Schema, TrainingRow};
use ruleml::service::cli::parse_data_file;
use serde_json::{json, Value};

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
}

pub fn f1() -> Dataset {
    parse_data_file(&std::fs::read_to_string(fixture("f1.jsonl")).unwrap()).unwrap()
}

pub fn items(pairs: &[(&str, &str)]) -> ItemSet {
    ItemSet::from_pairs(pairs.iter().copied()).unwrap()
}

/// Random dataset: 2..=5 attributes of 2..=3 values (at most 12 items), the
/// last one an output, up to `max_rows` rows with occasional nulls and
/// weights above one.
pub fn random_dataset(rng: &mut impl Rng, max_rows: usize) -> Dataset {
    let n_attrs = rng.gen_range(2..=5);
    let mut attrs = Vec::new();
    let mut budget = 12;
    for i in 0..n_attrs {
        let left = n_attrs - i - 1;
        let max = (budget - 2 * left).min(3);
        let size = rng.gen_range(2..=max.max(2));
        budget -= size;
        let values: Vec<String> = (0..size).map(|v| format!("v{v}")).collect();
        let name = format!("a{i}");
        attrs.push(if i + 1 == n_attrs {
            AttributeSchema::output(name, values).unwrap()
        } else {
            AttributeSchema::input(name, values).unwrap()
        });
    }
    let schema = Schema::new(attrs).unwrap();
    let skew: f64 = rng.gen_range(0.0..0.8);
    let rows = rng.gen_range(1..=max_rows);
    let mut data = Dataset::new(schema.clone());
    for _ in 0..rows {
        let mut inputs = BTreeMap::new();
        let mut outputs = BTreeMap::new();
        for a in schema.attributes() {
            // skew concentrates mass on the first value so long patterns occur
            let value = if rng.gen_bool(skew) {
                a.domain()[0].clone()
            } else {
                a.domain()[rng.gen_range(0..a.domain().len())].clone()
            };
            match a.kind() {
                ruleml::model::AttributeKind::Input => {
                    let v = if rng.gen_bool(0.1) { None } else { Some(value) };
                    inputs.insert(a.name().to_string(), v);
                }
                ruleml::model::AttributeKind::Output => {
                    outputs.insert(a.name().to_string(), value);
                }
            }
        }
        let weight = if rng.gen_bool(0.2) {
            rng.gen_range(2..=4)
        } else {
            1
        };
        data.push(TrainingRow {
            inputs,
            outputs,
            weight,
        })
        .unwrap();
    }
    data
}

pub fn oracle_rows(data: &Dataset) -> Vec<(ItemSet, u64)> {
    data.rows()
        .iter()
        .map(|r| (row_to_itemset(r), r.weight))
        .collect()
}

/// Elements of `family` with no proper superset in `family`.
pub fn maximal_of(family: &[FrequentItemSet]) -> Vec<FrequentItemSet> {
    family
        .iter()
        .filter(|f| {
            !family
                .iter()
                .any(|g| g.items.len() > f.items.len() && f.items.is_subset_of(&g.items))
        })
        .cloned()
        .collect()
}

/// A line-oriented protocol client.
pub struct Client {
    reader: BufReader<TcpStream>,
    writer: TcpStream,
    next_id: u64,
}

impl Client {
    pub fn connect(addr: &str) -> Client {
        let stream = TcpStream::connect(addr).unwrap();
        stream.set_nodelay(true).unwrap();
        Client {
            reader: BufReader::new(stream.try_clone().unwrap()),
            writer: stream,
            next_id: 0,
        }
    }

    pub fn send_raw(&mut self, line: &str) -> Value {
        self.writer.write_all(line.as_bytes()).unwrap();
        self.writer.write_all(b"\n").unwrap();
        self.writer.flush().unwrap();
        let mut response = String::new();
        self.reader.read_line(&mut response).unwrap();
        serde_json::from_str(&response).unwrap()
    }

    pub fn call(&mut self, request: &str, key: Option<&str>, params: Value) -> Value {
        self.next_id += 1;
        let mut req = json!({"request": request, "params": params, "id": self.next_id});
        if let Some(k) = key {
            req["key"] = json!(k);
        }
        let response = self.send_raw(&req.to_string());
        assert_eq!(response["id"], json!(self.next_id), "id must be echoed");
        response
    }

    pub fn ok(&mut self, request: &str, key: Option<&str>, params: Value) -> Value {
        let r = self.call(request, key, params.clone());
        assert_eq!(r["ok"], json!(true), "{request} {params} failed: {r}");
        r["result"].clone()
    }

    pub fn err(&mut self, request: &str, key: Option<&str>, params: Value) -> String {
        let r = self.call(request, key, params.clone());
        assert_eq!(r["ok"], json!(false), "{request} {params} should fail: {r}");
        assert!(r.get("result").is_none());
        r["error"]["code"].as_str().unwrap().to_string()
    }
}

pub fn f1_schema_params() -> Value {
    json!({
        "inputs": ["headphones:input:{yes,no}", "hour:input:{morning,evening}"],
        "outputs": ["app:output:{music,none}"]
    })
}

pub fn f1_rows_json() -> Vec<Value> {
    f1().rows()
        .iter()
        .map(|r| serde_json::to_value(r).unwrap())
        .collect()
}
