use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, ChildStdout, Command, Stdio};
use std::sync::{Mutex, OnceLock};
use std::time::Instant;

use super::wire::{decode_meta, decode_response, encode_meta_request, encode_request};
use super::{AdapterError, ModelAdapter, ModelMeta, ModelOutput, RetryPolicy};
use crate::mask_io::ImageBuffer;

struct Session {
    child: Child,
    stdin: ChildStdin,
    stdout: BufReader<ChildStdout>,
}

impl Drop for Session {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

/// Line-delimited JSON over a child process' stdin/stdout.
///
/// The child is spawned lazily and respawned after a transport failure.
/// Requests are serialized through one pipe.
pub struct SubprocessAdapter {
    program: String,
    args: Vec<String>,
    retry: RetryPolicy,
    session: Mutex<Option<Session>>,
    meta: OnceLock<ModelMeta>,
}

impl std::fmt::Debug for SubprocessAdapter {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SubprocessAdapter")
            .field("program", &self.program)
            .field("args", &self.args)
            .finish()
    }
}

impl SubprocessAdapter {
    pub fn new(program: impl Into<String>, args: Vec<String>, retry: RetryPolicy) -> Self {
        SubprocessAdapter {
            program: program.into(),
            args,
            retry,
            session: Mutex::new(None),
            meta: OnceLock::new(),
        }
    }

    fn spawn(&self) -> Result<Session, AdapterError> {
        let mut child = Command::new(&self.program)
            .args(&self.args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|e| AdapterError::Transport(format!("spawn {}: {e}", self.program)))?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = BufReader::new(child.stdout.take().expect("piped stdout"));
        Ok(Session {
            child,
            stdin,
            stdout,
        })
    }

    /// Sends one line and reads one line back.
    fn exchange(&self, line: &str) -> Result<String, AdapterError> {
        let mut guard = self.session.lock().unwrap_or_else(|p| p.into_inner());
        if guard.is_none() {
            *guard = Some(self.spawn()?);
        }
        let session = guard.as_mut().expect("session just created");
        let result = (|| {
            session.stdin.write_all(line.as_bytes())?;
            session.stdin.write_all(b"\n")?;
            session.stdin.flush()?;
            let mut reply = String::new();
            if session.stdout.read_line(&mut reply)? == 0 {
                return Err(std::io::Error::new(
                    std::io::ErrorKind::UnexpectedEof,
                    "model process closed its output",
                ));
            }
            Ok(reply)
        })();
        match result {
            Ok(reply) => Ok(reply),
            Err(e) => {
                *guard = None;
                Err(AdapterError::Transport(e.to_string()))
            }
        }
    }
}

impl ModelAdapter for SubprocessAdapter {
    fn predict_batch(&self, images: &[ImageBuffer]) -> Result<Vec<ModelOutput>, AdapterError> {
        if images.is_empty() {
            return Err(AdapterError::Protocol("empty batch".into()));
        }
        let line = encode_request(images);
        self.retry.run(|| {
            let start = Instant::now();
            let reply = self.exchange(&line)?;
            decode_response(reply.trim_end(), images.len(), start.elapsed().as_secs_f64() * 1e3)
        })
    }

    fn meta(&self) -> Result<ModelMeta, AdapterError> {
        if let Some(m) = self.meta.get() {
            return Ok(m.clone());
        }
        let line = encode_meta_request();
        let meta = self
            .retry
            .run(|| decode_meta(self.exchange(&line)?.trim_end()))?;
        Ok(self.meta.get_or_init(|| meta).clone())
    }
}
