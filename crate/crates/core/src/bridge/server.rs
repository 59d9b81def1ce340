//! TCP front end. Each connection gets its own thread and [`Session`]. The
//! first bytes decide the framing: an HTTP `GET` upgrades to WebSocket,
//! anything else is read as newline-delimited JSON.

use super::session::{Session, SessionContext};
use log::{debug, info, warn};
use std::io::{self, BufRead, BufReader, Write};
use std::net::{SocketAddr, TcpListener, TcpStream};
use std::sync::mpsc::{self, Receiver, TryRecvError};
use std::sync::Arc;
use std::thread;
use std::time::{Duration, Instant};
use tungstenite::{Message, WebSocket};

pub const BIND_ENV: &str = "MONOLAND_BIND";
pub const TICK_HZ_ENV: &str = "MONOLAND_TICK_HZ";
pub const DEFAULT_BIND: &str = "127.0.0.1:8765";
pub const DEFAULT_TICK_HZ: f64 = 20.0;

#[derive(Debug, Clone, PartialEq)]
pub struct ServeOptions {
    pub bind: String,
    /// Wall-clock tick rate of live sessions.
    pub tick_hz: f64,
}

impl Default for ServeOptions {
    fn default() -> Self {
        Self {
            bind: DEFAULT_BIND.to_string(),
            tick_hz: DEFAULT_TICK_HZ,
        }
    }
}

impl ServeOptions {
    /// Applies `MONOLAND_BIND` and `MONOLAND_TICK_HZ` when set.
    pub fn with_env_overrides(mut self) -> io::Result<Self> {
        if let Ok(b) = std::env::var(BIND_ENV) {
            self.bind = b;
        }
        if let Ok(h) = std::env::var(TICK_HZ_ENV) {
            self.tick_hz = h
                .parse()
                .map_err(|_| io::Error::new(io::ErrorKind::InvalidInput, format!("{TICK_HZ_ENV}={h:?} is not a number")))?;
        }
        Ok(self)
    }

    pub fn period(&self) -> io::Result<Duration> {
        if !(self.tick_hz.is_finite() && self.tick_hz > 0.0) {
            return Err(io::Error::new(io::ErrorKind::InvalidInput, "tick rate must be positive"));
        }
        Ok(Duration::from_secs_f64(1.0 / self.tick_hz))
    }
}

/// A message pipe to one client.
trait Transport {
    /// Complete incoming lines, without blocking. An error means the peer is gone.
    fn poll(&mut self) -> io::Result<Vec<String>>;
    fn send(&mut self, line: &str) -> io::Result<()>;
    fn close(&mut self);
}

struct RawTransport {
    stream: TcpStream,
    rx: Receiver<String>,
    eof: bool,
}

impl RawTransport {
    fn new(stream: TcpStream) -> io::Result<Self> {
        let reader = BufReader::new(stream.try_clone()?);
        let (tx, rx) = mpsc::channel();
        thread::spawn(move || {
            for line in reader.lines() {
                match line {
                    Ok(l) if l.trim().is_empty() => {}
                    Ok(l) => {
                        if tx.send(l).is_err() {
                            break;
                        }
                    }
                    Err(_) => break,
                }
            }
        });
        Ok(Self { stream, rx, eof: false })
    }
}

impl Transport for RawTransport {
    fn poll(&mut self) -> io::Result<Vec<String>> {
        if self.eof {
            return Err(io::ErrorKind::ConnectionAborted.into());
        }
        let mut out = Vec::new();
        loop {
            match self.rx.try_recv() {
                Ok(l) => out.push(l),
                Err(TryRecvError::Empty) => break,
                Err(TryRecvError::Disconnected) => {
                    self.eof = true;
                    if out.is_empty() {
                        return Err(io::ErrorKind::ConnectionAborted.into());
                    }
                    break;
                }
            }
        }
        Ok(out)
    }

    fn send(&mut self, line: &str) -> io::Result<()> {
        self.stream.write_all(line.as_bytes())?;
        self.stream.write_all(b"\n")
    }

    fn close(&mut self) {
        let _ = self.stream.shutdown(std::net::Shutdown::Both);
    }
}

struct WsTransport {
    ws: WebSocket<TcpStream>,
}

impl Transport for WsTransport {
    fn poll(&mut self) -> io::Result<Vec<String>> {
        let mut out = Vec::new();
        loop {
            match self.ws.read() {
                Ok(Message::Text(t)) => out.extend(t.as_str().lines().filter(|l| !l.trim().is_empty()).map(String::from)),
                Ok(Message::Close(_)) => return Err(io::ErrorKind::ConnectionAborted.into()),
                Ok(_) => {}
                Err(tungstenite::Error::Io(e)) if matches!(e.kind(), io::ErrorKind::WouldBlock | io::ErrorKind::TimedOut) => {
                    break
                }
                Err(e) => return Err(io::Error::other(e)),
            }
        }
        Ok(out)
    }

    fn send(&mut self, line: &str) -> io::Result<()> {
        self.ws.send(Message::text(line)).map_err(io::Error::other)
    }

    fn close(&mut self) {
        let _ = self.ws.close(None);
        let _ = self.ws.flush();
    }
}

fn open_transport(stream: TcpStream) -> io::Result<Box<dyn Transport>> {
    stream.set_nodelay(true)?;
    stream.set_read_timeout(Some(Duration::from_secs(10)))?;
    let mut head = [0u8; 4];
    let n = loop {
        let n = stream.peek(&mut head)?;
        if n == 0 || n >= 4 {
            break n;
        }
        thread::sleep(Duration::from_millis(1));
    };
    if n == 0 {
        return Err(io::ErrorKind::UnexpectedEof.into());
    }
    if &head == b"GET " {
        stream.set_read_timeout(None)?;
        let ws = tungstenite::accept(stream).map_err(|e| io::Error::other(e.to_string()))?;
        ws.get_ref().set_read_timeout(Some(Duration::from_millis(1)))?;
        Ok(Box::new(WsTransport { ws }))
    } else {
        stream.set_read_timeout(None)?;
        Ok(Box::new(RawTransport::new(stream)?))
    }
}

fn run_connection(stream: TcpStream, ctx: Arc<SessionContext>, period: Duration) -> io::Result<()> {
    let mut t = open_transport(stream)?;
    let mut session = Session::new(ctx);
    let mut next = Instant::now();
    loop {
        for line in t.poll()? {
            for e in session.handle_line(&line) {
                t.send(&e.to_line())?;
            }
            if session.is_closing() {
                t.close();
                return Ok(());
            }
        }
        for e in session.tick() {
            t.send(&e.to_line())?;
        }
        next += period;
        let now = Instant::now();
        if next > now {
            thread::sleep(next - now);
        } else {
            next = now;
        }
    }
}

fn accept_loop(listener: TcpListener, ctx: Arc<SessionContext>, period: Duration) {
    for stream in listener.incoming() {
        match stream {
            Ok(s) => {
                let ctx = ctx.clone();
                let peer = s.peer_addr().ok();
                thread::spawn(move || match run_connection(s, ctx, period) {
                    Ok(()) => debug!("session {peer:?} closed"),
                    Err(e) => debug!("session {peer:?} ended: {e}"),
                });
            }
            Err(e) => warn!("accept failed: {e}"),
        }
    }
}

/// Binds and serves until the process exits.
pub fn serve(ctx: Arc<SessionContext>, opts: &ServeOptions) -> io::Result<()> {
    let period = opts.period()?;
    let listener = TcpListener::bind(&opts.bind)?;
    info!("listening on {} at {} Hz", listener.local_addr()?, opts.tick_hz);
    accept_loop(listener, ctx, period);
    Ok(())
}

/// Binds and serves on a background thread; returns the bound address.
/// Bind to port 0 to let the OS pick one.
pub fn spawn_server(ctx: Arc<SessionContext>, opts: &ServeOptions) -> io::Result<SocketAddr> {
    let period = opts.period()?;
    let listener = TcpListener::bind(&opts.bind)?;
    let addr = listener.local_addr()?;
    thread::spawn(move || accept_loop(listener, ctx, period));
    Ok(addr)
}
