//! Start the TCP server on an ephemeral port and drive one full playthrough
//! from a client thread, always picking the first option.

use std::io::{BufRead, BufReader, ErrorKind, Write};
use std::net::{TcpListener, TcpStream};
use std::time::Duration;

use emoact::server::Server;
use emoact::session::{decode, encode, ClientMessage, ServerMessage, SessionConfig};

fn main() -> std::io::Result<()> {
    let listener = TcpListener::bind("127.0.0.1:0")?;
    let addr = listener.local_addr()?;
    let server = Server::new(SessionConfig::default(), vec![], None);
    std::thread::spawn(move || server.serve_tcp(listener));
    println!("server on {addr}");

    let stream = TcpStream::connect(addr)?;
    let mut writer = stream.try_clone()?;
    let mut reader = BufReader::new(stream);
    let (mut seq, mut t) = (0u64, 0u64);
    let send = |msg: ClientMessage, writer: &mut TcpStream| writeln!(writer, "{}", encode(&msg));
    send(ClientMessage::start(seq, t, Some("detective")), &mut writer)?;

    // Replies to one event arrive together; a quiet socket means the batch is done.
    reader
        .get_ref()
        .set_read_timeout(Some(Duration::from_millis(200)))?;
    let mut pending: Option<String> = None;
    let mut line = String::new();
    loop {
        line.clear();
        match reader.read_line(&mut line) {
            Ok(0) => break,
            Ok(_) => {}
            Err(e) if matches!(e.kind(), ErrorKind::WouldBlock | ErrorKind::TimedOut) => {
                seq += 1;
                let next = match pending.take() {
                    Some(option) => {
                        t += 2_000;
                        ClientMessage::Choice { seq, t, option }
                    }
                    None => {
                        t += 5_000;
                        ClientMessage::Tick { seq, t }
                    }
                };
                send(next, &mut writer)?;
                continue;
            }
            Err(e) => return Err(e),
        }
        let msg: ServerMessage = decode(&line).expect("server speaks the protocol");
        match &msg {
            ServerMessage::Narration { text, .. } => println!("  {text}"),
            ServerMessage::ExpressionCue {
                label,
                eye_color,
                animation,
                ..
            } => {
                let anim = animation
                    .as_ref()
                    .map(|a| format!(" / {a}"))
                    .unwrap_or_default();
                println!("    [{label} / {eye_color}{anim}]")
            }
            ServerMessage::DecisionRequest {
                prompt, options, ..
            } => {
                println!("? {prompt} -> {}", options[0].text);
                pending = Some(options[0].id.clone());
            }
            ServerMessage::StateUpdate {
                finished: true,
                session_id,
                ..
            } => {
                println!("finished session {}", session_id.as_deref().unwrap_or("?"));
                break;
            }
            ServerMessage::StateUpdate { .. } => {}
            ServerMessage::Error { message, .. } => {
                eprintln!("error: {message}");
                break;
            }
        }
    }
    Ok(())
}
