use std::time::{SystemTime, UNIX_EPOCH};

use serde_json::{Map, Value};

use crate::Format;

/// Command result: a JSON object, an optional CSV rendering, and whether
/// every checked property held.
pub struct Report {
    pub json: Map<String, Value>,
    pub csv: Option<String>,
    pub pass: bool,
}

impl Report {
    pub fn new(command: &str, seed: u64) -> Self {
        let mut json = Map::new();
        json.insert("command".into(), Value::from(command));
        json.insert("seed".into(), Value::from(seed));
        Report {
            json,
            csv: None,
            pass: true,
        }
    }

    pub fn set(&mut self, key: &str, value: impl Into<Value>) -> &mut Self {
        self.json.insert(key.into(), value.into());
        self
    }

    pub fn render(&self, format: Format, timestamp: bool) -> String {
        match (format, &self.csv) {
            (Format::Csv, Some(csv)) => csv.clone(),
            _ => {
                let mut json = self.json.clone();
                json.insert("pass".into(), Value::from(self.pass));
                if timestamp {
                    let secs = SystemTime::now()
                        .duration_since(UNIX_EPOCH)
                        .map(|d| d.as_secs())
                        .unwrap_or(0);
                    json.insert("timestamp".into(), Value::from(secs));
                }
                let mut text = serde_json::to_string_pretty(&Value::Object(json))
                    .expect("JSON values always serialize");
                text.push('\n');
                text
            }
        }
    }
}
