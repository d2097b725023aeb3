use std::collections::{HashMap, HashSet};
use std::io::{self, BufRead, BufReader, Write};
use std::net::{TcpStream, ToSocketAddrs};
use std::process::{Child, ChildStdin, ChildStdout, Command, Stdio};
use std::sync::Mutex;
use std::thread;
use std::time::Duration;

use super::protocol::{encode_text_frame, parse_frame, Frame};
use super::{ClientOptions, TranslateError, TranslationRequest, TranslationResponse, Translator};

type Answers = HashMap<u64, Result<String, String>>;

/// Writes all requests on `writer` while reading responses from `reader`
/// until every id is answered. Returns whatever was answered plus the I/O
/// error that cut the exchange short, if any.
fn exchange<W, R>(
    writer: W,
    reader: &mut R,
    requests: &[&TranslationRequest],
) -> (Answers, Option<io::Error>)
where
    W: Write + Send,
    R: BufRead,
{
    let mut pending: HashSet<u64> = requests.iter().map(|r| r.id).collect();
    let mut answers = Answers::with_capacity(requests.len());
    let mut failure = None;
    thread::scope(|scope| {
        let writer_thread = scope.spawn(move || -> io::Result<()> {
            let mut w = io::BufWriter::new(writer);
            for r in requests {
                w.write_all(encode_text_frame(r.id, &r.text).as_bytes())?;
            }
            w.flush()
        });
        let mut line = String::new();
        while !pending.is_empty() {
            line.clear();
            match reader.read_line(&mut line) {
                Ok(0) => {
                    failure = Some(io::Error::new(
                        io::ErrorKind::UnexpectedEof,
                        format!(
                            "connection closed with {} responses outstanding",
                            pending.len()
                        ),
                    ));
                    break;
                }
                Ok(_) => {}
                Err(e) => {
                    failure = Some(e);
                    break;
                }
            }
            match parse_frame(&line) {
                Ok(Frame::Text { id, text }) => {
                    if pending.remove(&id) {
                        answers.insert(id, Ok(text));
                    } else {
                        tracing::warn!(id, "ignoring response for unknown id");
                    }
                }
                Ok(Frame::Error {
                    id: Some(id),
                    message,
                }) => {
                    if pending.remove(&id) {
                        answers.insert(id, Err(message));
                    }
                }
                Ok(Frame::Error { id: None, message }) => {
                    failure = Some(io::Error::new(
                        io::ErrorKind::InvalidData,
                        format!("server rejected a frame: {message}"),
                    ));
                    break;
                }
                Err(e) => {
                    failure = Some(io::Error::new(io::ErrorKind::InvalidData, e));
                    break;
                }
            }
        }
        match writer_thread.join() {
            Ok(Err(e)) if failure.is_none() && !pending.is_empty() => failure = Some(e),
            Err(_) if failure.is_none() => {
                failure = Some(io::Error::other("writer thread panicked"))
            }
            _ => {}
        }
    });
    (answers, failure)
}

fn backoff(attempt: u32) -> Duration {
    Duration::from_millis(50u64 << attempt.min(5))
}

fn check_unique(requests: &[TranslationRequest]) -> Result<(), TranslateError> {
    let mut seen = HashSet::with_capacity(requests.len());
    for r in requests {
        if !seen.insert(r.id) {
            return Err(TranslateError::InvalidRequest {
                id: r.id,
                reason: "duplicate id in batch".to_string(),
            });
        }
    }
    Ok(())
}

/// Retry loop shared by both network-style clients. `attempt_once` runs one
/// exchange for the still-pending requests; `Err` means the transport could
/// not even be opened.
fn with_retries<F>(
    requests: &[TranslationRequest],
    retries: u32,
    mut attempt_once: F,
) -> Result<Answers, TranslateError>
where
    F: FnMut(&[&TranslationRequest]) -> Result<(Answers, Option<io::Error>), io::Error>,
{
    let mut done = Answers::with_capacity(requests.len());
    let mut pending: Vec<&TranslationRequest> = requests.iter().collect();
    let mut failures: HashMap<u64, String> = HashMap::new();
    let mut opened = false;
    let mut last_error = String::new();
    for attempt in 0..=retries {
        if pending.is_empty() {
            break;
        }
        if attempt > 0 {
            thread::sleep(backoff(attempt - 1));
        }
        match attempt_once(&pending) {
            Err(e) => {
                tracing::warn!(attempt, error = %e, "backend connection failed");
                last_error = e.to_string();
            }
            Ok((answers, cut_short)) => {
                opened = true;
                if let Some(e) = cut_short {
                    tracing::warn!(attempt, error = %e, "backend exchange interrupted");
                    last_error = e.to_string();
                }
                for (id, outcome) in answers {
                    match outcome {
                        Ok(text) => {
                            failures.remove(&id);
                            done.insert(id, Ok(text));
                        }
                        Err(message) => {
                            tracing::warn!(attempt, id, %message, "request failed");
                            failures.insert(id, message);
                        }
                    }
                }
                pending.retain(|r| !done.contains_key(&r.id));
            }
        }
    }
    if !opened {
        return Err(TranslateError::TranslatorUnavailable(last_error));
    }
    for r in pending {
        let message = failures.remove(&r.id).unwrap_or_else(|| last_error.clone());
        done.insert(r.id, Err(message));
    }
    Ok(done)
}

fn into_responses(
    requests: &[TranslationRequest],
    mut answers: Answers,
) -> Vec<TranslationResponse> {
    requests
        .iter()
        .map(|r| TranslationResponse {
            id: r.id,
            outcome: answers
                .remove(&r.id)
                .unwrap_or_else(|| Err("no response".to_string())),
        })
        .collect()
}

/// Client for a protocol server on a TCP address. Each batch is split over
/// `workers` connections.
#[derive(Debug, Clone)]
pub struct TcpTranslator {
    addr: String,
    options: ClientOptions,
}

impl TcpTranslator {
    pub fn new(addr: impl Into<String>, options: ClientOptions) -> Self {
        Self {
            addr: addr.into(),
            options,
        }
    }

    fn connect(&self) -> io::Result<TcpStream> {
        let mut last = io::Error::new(
            io::ErrorKind::NotFound,
            format!("{} did not resolve", self.addr),
        );
        for addr in self.addr.to_socket_addrs()? {
            match TcpStream::connect_timeout(&addr, self.options.timeout) {
                Ok(stream) => {
                    stream.set_read_timeout(Some(self.options.timeout))?;
                    stream.set_nodelay(true)?;
                    return Ok(stream);
                }
                Err(e) => last = e,
            }
        }
        Err(last)
    }

    fn run_chunk(&self, chunk: &[TranslationRequest]) -> Result<Answers, TranslateError> {
        with_retries(chunk, self.options.retries, |pending| {
            let stream = self.connect()?;
            let writer = stream.try_clone()?;
            let mut reader = BufReader::new(stream);
            Ok(exchange(writer, &mut reader, pending))
        })
    }
}

impl Translator for TcpTranslator {
    fn translate_batch(
        &self,
        requests: &[TranslationRequest],
    ) -> Result<Vec<TranslationResponse>, TranslateError> {
        if requests.is_empty() {
            return Ok(Vec::new());
        }
        check_unique(requests)?;
        let workers = self.options.workers.max(1);
        let chunk_len = requests.len().div_ceil(workers);
        let results: Vec<Result<Answers, TranslateError>> = thread::scope(|scope| {
            let handles: Vec<_> = requests
                .chunks(chunk_len)
                .map(|chunk| scope.spawn(move || self.run_chunk(chunk)))
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("tcp worker panicked"))
                .collect()
        });
        let mut answers = Answers::with_capacity(requests.len());
        for r in results {
            answers.extend(r?);
        }
        Ok(into_responses(requests, answers))
    }
}

struct ChildProcess {
    child: Child,
    stdin: ChildStdin,
    stdout: BufReader<ChildStdout>,
}

impl ChildProcess {
    fn kill(mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

/// Client for a child process speaking the protocol on stdin/stdout. The
/// child is started on first use and restarted after transport failures.
pub struct CmdTranslator {
    program: String,
    args: Vec<String>,
    options: ClientOptions,
    process: Mutex<Option<ChildProcess>>,
}

impl CmdTranslator {
    pub fn new(program: impl Into<String>, args: Vec<String>, options: ClientOptions) -> Self {
        Self {
            program: program.into(),
            args,
            options,
            process: Mutex::new(None),
        }
    }

    fn spawn(&self) -> io::Result<ChildProcess> {
        let mut child = Command::new(&self.program)
            .args(&self.args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = BufReader::new(child.stdout.take().expect("piped stdout"));
        Ok(ChildProcess {
            child,
            stdin,
            stdout,
        })
    }
}

impl Translator for CmdTranslator {
    fn translate_batch(
        &self,
        requests: &[TranslationRequest],
    ) -> Result<Vec<TranslationResponse>, TranslateError> {
        if requests.is_empty() {
            return Ok(Vec::new());
        }
        check_unique(requests)?;
        let mut guard = self.process.lock().expect("child process lock poisoned");
        let answers = with_retries(requests, self.options.retries, |pending| {
            if guard.is_none() {
                *guard = Some(self.spawn()?);
            }
            let proc = guard.as_mut().expect("child just spawned");
            let (answers, failure) = exchange(&mut proc.stdin, &mut proc.stdout, pending);
            if failure.is_some() {
                if let Some(dead) = guard.take() {
                    dead.kill();
                }
            }
            Ok((answers, failure))
        })?;
        Ok(into_responses(requests, answers))
    }
}

impl Drop for CmdTranslator {
    fn drop(&mut self) {
        let slot = self.process.get_mut().map(Option::take);
        if let Ok(Some(mut proc)) = slot {
            // closing stdin lets a well-behaved server exit on its own
            drop(proc.stdin);
            let _ = proc.child.wait();
        }
    }
}
