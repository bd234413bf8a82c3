//! Client side of the wire protocol: a classifier living in another process,
//! reached over its standard streams or a TCP socket.

use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpStream;
use std::process::{Child, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::sync::Mutex;
use std::thread;
use std::time::Duration;

use super::{Classifier, OracleError};
use crate::graph::Graph;
use crate::protocol::{self, Response};
use crate::Label;

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(30);

#[derive(Debug, Clone)]
pub struct ExternalOptions {
    /// Per-request deadline, handshake included.
    pub timeout: Duration,
}

impl Default for ExternalOptions {
    fn default() -> Self {
        Self {
            timeout: DEFAULT_TIMEOUT,
        }
    }
}

struct Connection {
    writer: Box<dyn Write + Send>,
    lines: Receiver<std::io::Result<String>>,
    child: Option<Child>,
    closed: Option<String>,
}

impl Connection {
    fn close(&mut self, reason: String) {
        if let Some(mut child) = self.child.take() {
            let _ = child.kill();
            let _ = child.wait();
        }
        self.closed = Some(reason);
    }

    fn send(&mut self, line: &str) -> Result<(), OracleError> {
        let res = self
            .writer
            .write_all(line.as_bytes())
            .and_then(|_| self.writer.write_all(b"\n"))
            .and_then(|_| self.writer.flush());
        res.map_err(|e| OracleError::Backend(format!("write failed: {e}")))
    }

    fn recv(&mut self, timeout: Duration) -> Result<Response, OracleError> {
        let line = match self.lines.recv_timeout(timeout) {
            Ok(Ok(line)) => line,
            Ok(Err(e)) => return Err(OracleError::Backend(format!("read failed: {e}"))),
            Err(RecvTimeoutError::Timeout) => return Err(OracleError::Timeout(timeout)),
            Err(RecvTimeoutError::Disconnected) => {
                return Err(OracleError::Backend("classifier closed its output stream".into()))
            }
        };
        Ok(protocol::parse_response(&line)?)
    }
}

/// A classifier reached through the newline-delimited JSON protocol.
///
/// Queries are serialized through an internal lock; one external process
/// should back one search run at a time. Any I/O failure, timeout or protocol
/// violation closes the session for good.
pub struct ExternalOracle {
    conn: Mutex<Connection>,
    timeout: Duration,
    descriptor: String,
}

impl ExternalOracle {
    /// Spawns `command` through `sh -c` and performs the handshake.
    pub fn spawn(command: &str, n_vertices: usize, opts: ExternalOptions) -> Result<Self, OracleError> {
        let mut child = Command::new("sh")
            .arg("-c")
            .arg(command)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|e| OracleError::Handshake(format!("cannot spawn {command:?}: {e}")))?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = child.stdout.take().expect("piped stdout");
        Self::handshake(
            Box::new(stdin),
            stdout,
            Some(child),
            n_vertices,
            opts,
            format!("exec:{command}"),
        )
    }

    /// Connects to a classifier listening on `addr` and performs the handshake.
    pub fn connect_tcp(addr: &str, n_vertices: usize, opts: ExternalOptions) -> Result<Self, OracleError> {
        let stream = TcpStream::connect(addr)
            .map_err(|e| OracleError::Handshake(format!("cannot connect to {addr}: {e}")))?;
        let _ = stream.set_nodelay(true);
        let reader = stream
            .try_clone()
            .map_err(|e| OracleError::Handshake(format!("cannot clone socket: {e}")))?;
        Self::handshake(Box::new(stream), reader, None, n_vertices, opts, format!("tcp:{addr}"))
    }

    /// Runs the protocol over arbitrary streams.
    pub fn from_streams<R>(
        writer: Box<dyn Write + Send>,
        reader: R,
        n_vertices: usize,
        opts: ExternalOptions,
    ) -> Result<Self, OracleError>
    where
        R: Read + Send + 'static,
    {
        Self::handshake(writer, reader, None, n_vertices, opts, "streams".into())
    }

    fn handshake<R>(
        writer: Box<dyn Write + Send>,
        reader: R,
        child: Option<Child>,
        n_vertices: usize,
        opts: ExternalOptions,
        descriptor: String,
    ) -> Result<Self, OracleError>
    where
        R: Read + Send + 'static,
    {
        let (tx, rx) = mpsc::channel();
        thread::spawn(move || {
            let reader = BufReader::new(reader);
            for line in reader.lines() {
                let stop = line.is_err();
                if tx.send(line).is_err() || stop {
                    break;
                }
            }
        });
        let mut conn = Connection {
            writer,
            lines: rx,
            child,
            closed: None,
        };
        let result = conn
            .send(&protocol::hello(n_vertices).to_line())
            .and_then(|_| conn.recv(opts.timeout));
        match result {
            Ok(Response::Ready) => Ok(Self {
                conn: Mutex::new(conn),
                timeout: opts.timeout,
                descriptor,
            }),
            Ok(other) => {
                conn.close("handshake failed".into());
                Err(OracleError::Handshake(format!("expected ready, got {other:?}")))
            }
            Err(e) => {
                conn.close("handshake failed".into());
                Err(OracleError::Handshake(e.to_string()))
            }
        }
    }

    pub fn is_closed(&self) -> bool {
        self.conn.lock().map(|c| c.closed.is_some()).unwrap_or(true)
    }
}

impl Classifier for ExternalOracle {
    fn classify(&self, g: &Graph) -> Result<Label, OracleError> {
        let mut conn = self
            .conn
            .lock()
            .map_err(|_| OracleError::Backend("connection lock poisoned".into()))?;
        if let Some(reason) = &conn.closed {
            return Err(OracleError::Backend(format!("session closed: {reason}")));
        }
        let line = protocol::classify_request(g).to_line();
        let result = conn.send(&line).and_then(|_| conn.recv(self.timeout));
        match result {
            Ok(Response::Label(label)) => Ok(label),
            Ok(Response::Error(message)) => {
                conn.close(format!("classifier error: {message}"));
                Err(OracleError::Backend(message))
            }
            Ok(Response::Ready) => {
                conn.close("unexpected ready".into());
                Err(OracleError::Protocol(crate::protocol::ProtocolError::Unexpected("ready")))
            }
            Err(e) => {
                conn.close(e.to_string());
                Err(e)
            }
        }
    }

    fn describe(&self) -> String {
        self.descriptor.clone()
    }
}

impl Drop for ExternalOracle {
    fn drop(&mut self) {
        if let Ok(conn) = self.conn.get_mut() {
            if let Some(mut child) = conn.child.take() {
                let _ = child.kill();
                let _ = child.wait();
            }
        }
    }
}
