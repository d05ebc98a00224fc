use std::io::{self, BufRead, BufReader, Write};
use std::net::{SocketAddr, TcpListener, TcpStream};
use std::sync::Arc;
use std::thread;

use crate::Stepper;

pub const DEFAULT_PORT: u16 = 7878;

/// Accepts connections until the listener fails, one thread per client.
pub fn serve(listener: TcpListener, stepper: Arc<Stepper>) -> io::Result<()> {
    for conn in listener.incoming() {
        let stream = conn?;
        let stepper = Arc::clone(&stepper);
        thread::spawn(move || {
            let _ = handle_client(stream, &stepper);
        });
    }
    Ok(())
}

/// Binds on loopback and serves in the background. Port 0 picks a free port.
pub fn spawn(port: u16, stepper: Arc<Stepper>) -> io::Result<SocketAddr> {
    let listener = TcpListener::bind(("127.0.0.1", port))?;
    let addr = listener.local_addr()?;
    thread::spawn(move || serve(listener, stepper));
    Ok(addr)
}

fn handle_client(stream: TcpStream, stepper: &Stepper) -> io::Result<()> {
    let mut out = stream.try_clone()?;
    for line in BufReader::new(stream).lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let resp = stepper.handle_line(&line);
        out.write_all(resp.as_bytes())?;
        out.write_all(b"\n")?;
        out.flush()?;
    }
    Ok(())
}
