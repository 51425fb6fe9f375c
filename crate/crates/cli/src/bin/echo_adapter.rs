//! Fixed-answer detector speaking the adapter protocol, for testing hosts.
//!
//! Answers every request with the same language. A malformed request gets
//! an error response and exit status 3.

use std::collections::BTreeSet;
use std::io::{self, BufRead, BufWriter, Write};
use std::process::ExitCode;

use clap::Parser;
use lidbench::detect::{parse_request, Handshake, Response};
use serde_json::json;

#[derive(Debug, Parser)]
#[command(name = "echo-adapter", version, about = "Fixed-answer language detector adapter")]
struct Args {
    /// Name announced in the handshake
    #[arg(long, default_value = "echo")]
    name: String,
    /// Language returned for every document
    #[arg(long, default_value = "en")]
    lang: String,
    /// Declared language codes, comma-separated
    #[arg(long, value_delimiter = ',')]
    languages: Option<Vec<String>>,
    /// Answer with an empty language for this record id; repeatable
    #[arg(long = "empty-for", value_name = "ID")]
    empty_for: Vec<String>,
}

fn serve(args: &Args) -> io::Result<ExitCode> {
    let stdin = io::stdin().lock();
    let mut out = BufWriter::new(io::stdout().lock());
    let handshake = Handshake {
        name: args.name.clone(),
        languages: args.languages.clone(),
    };
    serde_json::to_writer(&mut out, &handshake)?;
    out.write_all(b"\n")?;
    out.flush()?;

    let empty: BTreeSet<&str> = args.empty_for.iter().map(String::as_str).collect();
    for line in stdin.lines() {
        let line = line?;
        let req = match parse_request(&line) {
            Ok(req) => req,
            Err(e) => {
                serde_json::to_writer(&mut out, &json!({"id": null, "error": e}))?;
                out.write_all(b"\n")?;
                out.flush()?;
                return Ok(ExitCode::from(3));
            }
        };
        let lang = if empty.contains(req.id.as_str()) { "" } else { args.lang.as_str() };
        let resp = Response {
            id: Some(req.id),
            lang: Some(lang.to_string()),
            conf: None,
            error: None,
        };
        serde_json::to_writer(&mut out, &resp)?;
        out.write_all(b"\n")?;
        out.flush()?;
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let args = Args::parse();
    match serve(&args) {
        Ok(code) => code,
        Err(e) if e.kind() == io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("echo-adapter: {e}");
            ExitCode::from(4)
        }
    }
}
