use std::io::{self, BufRead, BufReader, Read, Write};
use std::net::{SocketAddr, TcpListener, TcpStream};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::thread::{self, JoinHandle};

use super::protocol::{encode_error_frame, encode_text_frame, parse_frame, Frame};
use super::{MockSpec, MockTranslator, TranslateError};

/// Answers protocol frames from `reader` on `writer` until EOF. Malformed
/// frames get an error frame and the connection stays open.
pub fn serve_connection<R: Read, W: Write>(
    reader: &mut BufReader<R>,
    writer: &mut W,
    mock: &MockTranslator,
) -> io::Result<()> {
    let mut buf = Vec::new();
    loop {
        buf.clear();
        if reader.read_until(b'\n', &mut buf)? == 0 {
            break;
        }
        let reply = match std::str::from_utf8(&buf) {
            Err(_) => encode_error_frame(None, "frame is not valid UTF-8"),
            Ok(line) => match parse_frame(line) {
                Ok(Frame::Text { id, text }) => {
                    let out = mock.translate_one(id, &text);
                    if out.contains(['\n', '\r']) {
                        encode_error_frame(Some(id), "translation contains a line break")
                    } else {
                        encode_text_frame(id, &out)
                    }
                }
                Ok(Frame::Error { id, .. }) => {
                    encode_error_frame(id, "error frames are not requests")
                }
                Err(e) => encode_error_frame(None, &format!("malformed frame: {e}")),
            },
        };
        writer.write_all(reply.as_bytes())?;
        if reader.buffer().is_empty() {
            writer.flush()?;
        }
    }
    writer.flush()
}

/// Serves the mock on standard input/output, for use as a `cmd:` backend.
pub fn serve_stdio(spec: MockSpec) -> io::Result<()> {
    let mock = MockTranslator::new(spec);
    let stdin = io::stdin();
    let mut reader = BufReader::new(stdin.lock());
    let stdout = io::stdout();
    let mut writer = io::BufWriter::new(stdout.lock());
    serve_connection(&mut reader, &mut writer, &mock)
}

/// Handle to a running TCP mock server; shuts down on drop.
pub struct MockServer {
    addr: SocketAddr,
    stop: Arc<AtomicBool>,
    accept_loop: Option<JoinHandle<()>>,
}

impl MockServer {
    pub fn local_addr(&self) -> SocketAddr {
        self.addr
    }

    /// Blocks until the accept loop exits.
    pub fn wait(mut self) {
        if let Some(handle) = self.accept_loop.take() {
            let _ = handle.join();
        }
    }

    pub fn shutdown(mut self) {
        self.stop_accepting();
    }

    fn stop_accepting(&mut self) {
        if let Some(handle) = self.accept_loop.take() {
            self.stop.store(true, Ordering::SeqCst);
            // wake the blocking accept
            let _ = TcpStream::connect(self.addr);
            let _ = handle.join();
        }
    }
}

impl Drop for MockServer {
    fn drop(&mut self) {
        self.stop_accepting();
    }
}

fn handle_client(stream: TcpStream, mock: Arc<MockTranslator>) {
    let peer = stream.peer_addr().ok();
    let result = stream.try_clone().and_then(|write_half| {
        let mut reader = BufReader::new(stream);
        let mut writer = io::BufWriter::new(write_half);
        serve_connection(&mut reader, &mut writer, &mock)
    });
    if let Err(e) = result {
        tracing::debug!(?peer, error = %e, "mock connection ended with error");
    }
}

/// Binds `listen` (e.g. `127.0.0.1:0`) and serves the mock, one thread per
/// connection.
pub fn serve_mock(listen: &str, spec: MockSpec) -> Result<MockServer, TranslateError> {
    let listener = TcpListener::bind(listen).map_err(|source| TranslateError::BindFailure {
        addr: listen.to_string(),
        source,
    })?;
    let addr = listener
        .local_addr()
        .map_err(|source| TranslateError::BindFailure {
            addr: listen.to_string(),
            source,
        })?;
    let stop = Arc::new(AtomicBool::new(false));
    let mock = Arc::new(MockTranslator::new(spec));
    let stop_flag = Arc::clone(&stop);
    let accept_loop = thread::spawn(move || {
        for conn in listener.incoming() {
            if stop_flag.load(Ordering::SeqCst) {
                break;
            }
            match conn {
                Ok(stream) => {
                    let mock = Arc::clone(&mock);
                    thread::spawn(move || handle_client(stream, mock));
                }
                Err(e) => tracing::warn!(error = %e, "accept failed"),
            }
        }
    });
    tracing::info!(%addr, "mock translator listening");
    Ok(MockServer {
        addr,
        stop,
        accept_loop: Some(accept_loop),
    })
}
