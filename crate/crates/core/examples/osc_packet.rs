//! Encodes positioning commands as OSC packets, decodes them back and sends
//! one over loopback UDP.
//!
//! `cargo run --example osc_packet`

use std::net::UdpSocket;
use std::time::Duration;

use wfslab::osc::{
    decode, encode, hex_dump, AddressSchema, OscSender, PositionCommand, TrajectoryCommand,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let schema = AddressSchema::parse("position = /source/{id}/xy\n")?;
    let pos = schema.position_message(&PositionCommand {
        source_id: 1,
        x: 1.0,
        y: 2.0,
    })?;
    let bytes = encode(&pos)?;
    println!(
        "{} ({} bytes)\n  {}",
        pos.address,
        bytes.len(),
        hex_dump(&bytes)
    );
    assert_eq!(decode(&bytes)?, pos);

    let traj = AddressSchema::default().trajectory_message(&TrajectoryCommand {
        source_id: 3,
        start: (-0.5, 0.2),
        end: (0.9, -0.6),
        duration: 2.5,
    })?;
    let rx = UdpSocket::bind("127.0.0.1:0")?;
    rx.set_read_timeout(Some(Duration::from_secs(2)))?;
    let sent = OscSender::connect(rx.local_addr()?)?.send(&traj)?;
    let mut buf = [0u8; 512];
    let n = rx.recv(&mut buf)?;
    let got = decode(&buf[..n])?;
    println!(
        "sent {sent} bytes over loopback, received {} {:?}",
        got.address, got.args
    );
    Ok(())
}
