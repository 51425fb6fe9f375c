//! Host side of the line-delimited JSON adapter protocol.
//!
//! The adapter prints a handshake line on start, then answers each request
//! line `{"id","text"}` with one response line `{"id","lang","conf"}` in
//! request order. The host closes stdin when done; the adapter must exit 0.

use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, ChildStdout, Command, Stdio};
use std::thread;

use serde::{Deserialize, Serialize};

use super::{DetectError, DetectionSession, Detector, RawDetection};
use crate::corpora::CorpusDocument;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Handshake {
    pub name: String,
    pub languages: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Request {
    pub id: String,
    pub text: String,
}

/// A response line. Error responses carry `error` and a null `id`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Response {
    pub id: Option<String>,
    #[serde(default)]
    pub lang: Option<String>,
    #[serde(default)]
    pub conf: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

pub fn parse_handshake(line: &str) -> Result<Handshake, String> {
    let hs: Handshake = serde_json::from_str(line.trim_end()).map_err(|e| format!("bad handshake: {e}"))?;
    if hs.name.is_empty() {
        return Err("bad handshake: empty name".into());
    }
    Ok(hs)
}

pub fn parse_request(line: &str) -> Result<Request, String> {
    serde_json::from_str(line.trim_end()).map_err(|e| format!("bad request: {e}"))
}

pub fn parse_response(line: &str) -> Result<Response, String> {
    let resp: Response = serde_json::from_str(line.trim_end()).map_err(|e| format!("bad response: {e}"))?;
    if let Some(err) = &resp.error {
        return Err(format!("adapter error: {err}"));
    }
    if resp.id.is_none() {
        return Err("response without id".into());
    }
    if resp.lang.is_none() {
        return Err("response without lang".into());
    }
    if let Some(c) = resp.conf {
        if !(0.0..=1.0).contains(&c) {
            return Err(format!("confidence {c} outside [0, 1]"));
        }
    }
    Ok(resp)
}

/// An external detector run as `sh -c <command>`.
#[derive(Debug, Clone)]
pub struct ExternalDetector {
    name: String,
    command: String,
}

struct Running {
    child: Child,
    stdin: Option<ChildStdin>,
    stdout: BufReader<ChildStdout>,
}

impl ExternalDetector {
    pub fn new(name: impl Into<String>, command: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            command: command.into(),
        }
    }

    pub fn command(&self) -> &str {
        &self.command
    }

    fn protocol(&self, reason: impl Into<String>) -> DetectError {
        DetectError::Protocol {
            detector: self.name.clone(),
            reason: reason.into(),
        }
    }

    fn spawn(&self) -> Result<(Running, Handshake), DetectError> {
        let mut child = Command::new("sh")
            .arg("-c")
            .arg(&self.command)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|e| self.protocol(format!("cannot start `{}`: {e}", self.command)))?;
        let stdin = child.stdin.take();
        let stdout = BufReader::new(child.stdout.take().expect("piped stdout"));
        let mut running = Running { child, stdin, stdout };
        let mut line = String::new();
        let read = running.stdout.read_line(&mut line);
        let handshake = match read {
            Ok(0) => Err(self.protocol("exited before handshake")),
            Ok(_) => parse_handshake(&line).map_err(|e| self.protocol(e)),
            Err(e) => Err(self.protocol(format!("reading handshake: {e}"))),
        }
        .and_then(|hs| {
            if hs.name == self.name {
                Ok(hs)
            } else {
                Err(self.protocol(format!("handshake name {:?} does not match", hs.name)))
            }
        });
        match handshake {
            Ok(hs) => Ok((running, hs)),
            Err(e) => {
                let _ = running.child.kill();
                let _ = running.child.wait();
                Err(e)
            }
        }
    }

    /// Starts the adapter, reads its handshake and shuts it down.
    pub fn probe(&self) -> Result<Handshake, DetectError> {
        let (mut running, hs) = self.spawn()?;
        drop(running.stdin.take());
        let status = running
            .child
            .wait()
            .map_err(|e| self.protocol(format!("waiting for exit: {e}")))?;
        if !status.success() {
            return Err(self.protocol(format!("exited with {status} after handshake")));
        }
        Ok(hs)
    }
}

struct ExternalSession<'a> {
    detector: &'a ExternalDetector,
    running: Running,
}

impl ExternalSession<'_> {
    fn exchange(&mut self, docs: &[CorpusDocument]) -> Result<Vec<RawDetection>, DetectError> {
        let det = self.detector;
        let mut stdin = self.running.stdin.take().expect("stdin open");
        let requests: Vec<u8> = docs
            .iter()
            .flat_map(|d| {
                let mut line = serde_json::to_vec(&Request {
                    id: d.record_id.clone(),
                    text: d.text.clone(),
                })
                .expect("request serializes");
                line.push(b'\n');
                line
            })
            .collect();
        // a separate writer keeps both pipes draining
        let writer = thread::spawn(move || {
            let res = stdin.write_all(&requests).and_then(|_| stdin.flush());
            drop(stdin);
            res
        });

        let mut outputs = Vec::with_capacity(docs.len());
        let mut line = String::new();
        for doc in docs {
            line.clear();
            let n = self
                .running
                .stdout
                .read_line(&mut line)
                .map_err(|e| det.protocol(format!("reading response: {e}")))?;
            if n == 0 {
                return Err(DetectError::Failure {
                    record_id: doc.record_id.clone(),
                    reason: format!("adapter {:?} closed its output early", det.name),
                });
            }
            let resp = parse_response(&line).map_err(|e| det.protocol(e))?;
            if resp.id.as_deref() != Some(doc.record_id.as_str()) {
                return Err(det.protocol(format!(
                    "expected response for {:?}, got {:?}",
                    doc.record_id, resp.id
                )));
            }
            let lang = resp.lang.unwrap_or_default();
            if lang.trim().is_empty() {
                return Err(DetectError::EmptyPrediction {
                    record_id: doc.record_id.clone(),
                });
            }
            outputs.push(RawDetection { lang, conf: resp.conf });
        }

        line.clear();
        match self.running.stdout.read_line(&mut line) {
            Ok(0) => {}
            Ok(_) => return Err(det.protocol("unexpected output after the last response")),
            Err(e) => return Err(det.protocol(format!("reading after last response: {e}"))),
        }
        writer
            .join()
            .expect("writer thread")
            .map_err(|e| det.protocol(format!("writing requests: {e}")))?;
        let status = self
            .running
            .child
            .wait()
            .map_err(|e| det.protocol(format!("waiting for exit: {e}")))?;
        if !status.success() {
            return Err(det.protocol(format!("exited with {status}")));
        }
        Ok(outputs)
    }
}

impl DetectionSession for ExternalSession<'_> {
    fn detect_all(mut self: Box<Self>, docs: &[CorpusDocument]) -> Result<Vec<RawDetection>, DetectError> {
        let result = self.exchange(docs);
        if result.is_err() {
            let _ = self.running.child.kill();
            let _ = self.running.child.wait();
        }
        result
    }
}

impl Detector for ExternalDetector {
    fn open(&self) -> Result<Box<dyn DetectionSession + '_>, DetectError> {
        let (running, _) = self.spawn()?;
        Ok(Box::new(ExternalSession { detector: self, running }))
    }
}
