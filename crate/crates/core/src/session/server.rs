use std::io;
use std::net::{SocketAddr, TcpListener, TcpStream, ToSocketAddrs};
use std::thread;

use thiserror::Error;
use tungstenite::{Message, WebSocket};

use super::protocol::ConnectionHost;
use super::SessionConfig;

#[derive(Debug, Error)]
#[error("cannot listen on {addr}: {source}")]
pub struct BindError {
    pub addr: String,
    #[source]
    pub source: io::Error,
}

fn bind(addr: impl ToSocketAddrs + std::fmt::Debug) -> Result<TcpListener, BindError> {
    TcpListener::bind(&addr).map_err(|source| BindError {
        addr: format!("{addr:?}"),
        source,
    })
}

/// Serve sessions on `port` until the process exits. Each connection gets
/// its own thread and its own session.
pub fn serve_session(cfg: SessionConfig, port: u16) -> Result<(), BindError> {
    let listener = bind(("127.0.0.1", port))?;
    log::info!(
        "listening on ws://{}",
        listener.local_addr().map(|a| a.to_string()).unwrap_or_default()
    );
    accept_loop(listener, cfg);
    Ok(())
}

/// Start a server on a background thread and return its address. Port 0
/// picks a free port.
pub fn spawn_server(cfg: SessionConfig, port: u16) -> Result<SocketAddr, BindError> {
    let listener = bind(("127.0.0.1", port))?;
    let addr = listener.local_addr().map_err(|source| BindError {
        addr: format!("127.0.0.1:{port}"),
        source,
    })?;
    thread::spawn(move || accept_loop(listener, cfg));
    Ok(addr)
}

fn accept_loop(listener: TcpListener, cfg: SessionConfig) {
    for stream in listener.incoming() {
        match stream {
            Ok(stream) => {
                let cfg = cfg.clone();
                thread::spawn(move || {
                    if let Err(e) = serve_connection(stream, cfg) {
                        log::debug!("connection closed: {e}");
                    }
                });
            }
            Err(e) => log::warn!("accept failed: {e}"),
        }
    }
}

fn serve_connection(stream: TcpStream, cfg: SessionConfig) -> Result<(), tungstenite::Error> {
    let peer = stream.peer_addr().ok();
    let mut ws: WebSocket<TcpStream> = tungstenite::accept(stream).map_err(|e| match e {
        tungstenite::HandshakeError::Failure(e) => e,
        tungstenite::HandshakeError::Interrupted(_) => tungstenite::Error::ConnectionClosed,
    })?;
    log::info!("session opened for {peer:?}");
    let mut host = ConnectionHost::new(cfg);
    loop {
        let replies = match ws.read()? {
            Message::Text(text) => host.handle_text(text.as_str()),
            Message::Binary(bytes) => match std::str::from_utf8(&bytes) {
                Ok(text) => host.handle_text(text),
                Err(_) => host.handle_text(""),
            },
            Message::Close(_) => return Ok(()),
            _ => continue,
        };
        for r in replies {
            ws.send(Message::text(r))?;
        }
    }
}
