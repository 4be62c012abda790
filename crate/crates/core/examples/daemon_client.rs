//! A daemon on an ephemeral TCP port and a client speaking JSON lines to it.
//!
//!     cargo run --example daemon_client
//!
//! The same protocol is served by `ruleml serve --store DIR --listen PATH`
//! over a unix socket.

use std::io::{BufRead, BufReader, Write};
use std::net::TcpStream;
use std::thread;

use ruleml::service::{Endpoint, Server};
use serde_json::{json, Value};

struct Conn {
    reader: BufReader<TcpStream>,
    writer: TcpStream,
    id: u64,
}

impl Conn {
    fn call(&mut self, request: &str, key: Option<&str>, params: Value) -> Value {
        self.id += 1;
        let mut req = json!({"request": request, "params": params, "id": self.id});
        if let Some(k) = key {
            req["key"] = json!(k);
        }
        println!(">> {req}");
        writeln!(self.writer, "{req}").unwrap();
        let mut line = String::new();
        self.reader.read_line(&mut line).unwrap();
        print!("<< {line}");
        serde_json::from_str(&line).unwrap()
    }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = tempfile::tempdir()?;
    let server = Server::bind(dir.path(), &Endpoint::parse("tcp:127.0.0.1:0"))?;
    let endpoint = server.local_endpoint();
    println!("listening on {endpoint}");
    thread::spawn(move || server.run());

    let Endpoint::Tcp(addr) = endpoint else {
        unreachable!("bound over tcp")
    };
    let stream = TcpStream::connect(addr)?;
    stream.set_nodelay(true)?;
    let mut c = Conn {
        reader: BufReader::new(stream.try_clone()?),
        writer: stream,
        id: 0,
    };

    let r = c.call("register_app", None, json!({"name": "Camera"}));
    let key = r["result"]["key"].as_str().unwrap().to_string();
    let k = Some(key.as_str());
    c.call(
        "set_input_output",
        k,
        json!({
            "inputs": ["light:input:{bright,dim}"],
            "outputs": ["flash:output:{on,off}"]
        }),
    );
    c.call(
        "load_training_data",
        k,
        json!({"rows": [
            {"inputs": {"light": "dim"}, "outputs": {"flash": "on"}},
            {"inputs": {"light": "dim"}, "outputs": {"flash": "on"}},
            {"inputs": {"light": "bright"}, "outputs": {"flash": "off"}}
        ]}),
    );
    c.call(
        "generate_rules",
        k,
        json!({"min_support": 0.3, "min_confidence": 0.9}),
    );
    c.call("set_generation_mode", k, json!({"mode": "automated"}));
    c.call("get_current_output", k, json!({"inputs": {"light": "dim"}}));
    c.call("send_feedback_last_gco", k, json!({"verdict": "positive"}));
    // errors come back as codes, and the connection stays usable
    c.call("send_feedback_last_gco", k, json!({"verdict": "positive"}));
    c.call("get_current_output", k, json!({"inputs": {"iso": "800"}}));
    c.call("ping", None, json!({}));
    Ok(())
}
