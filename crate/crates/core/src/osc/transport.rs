use std::net::{SocketAddr, ToSocketAddrs, UdpSocket};
use std::sync::mpsc;
use std::thread::JoinHandle;

use super::codec::{encode, OscMessage};
use super::schema::{AddressSchema, PositionCommand, TrajectoryCommand};
use super::OscError;

/// Resolves `host:port`.
pub fn parse_endpoint(endpoint: &str) -> Result<SocketAddr, OscError> {
    endpoint
        .to_socket_addrs()
        .map_err(|_| OscError::Endpoint(endpoint.to_string()))?
        .next()
        .ok_or_else(|| OscError::Endpoint(endpoint.to_string()))
}

/// Anything that accepts outgoing OSC messages.
pub trait CommandSink {
    fn send_message(&mut self, msg: &OscMessage) -> Result<(), OscError>;
}

/// Fire-and-forget UDP sender owning one socket.
#[derive(Debug)]
pub struct OscSender {
    socket: UdpSocket,
    target: SocketAddr,
}

impl OscSender {
    pub fn connect(target: SocketAddr) -> Result<Self, OscError> {
        let bind: SocketAddr = if target.is_ipv4() {
            "0.0.0.0:0".parse().unwrap()
        } else {
            "[::]:0".parse().unwrap()
        };
        let socket = UdpSocket::bind(bind)?;
        Ok(Self { socket, target })
    }

    pub fn target(&self) -> SocketAddr {
        self.target
    }

    /// Sends one datagram; returns the number of bytes written.
    pub fn send(&self, msg: &OscMessage) -> Result<usize, OscError> {
        let bytes = encode(msg)?;
        Ok(self.socket.send_to(&bytes, self.target)?)
    }
}

impl CommandSink for OscSender {
    fn send_message(&mut self, msg: &OscMessage) -> Result<(), OscError> {
        self.send(msg).map(|_| ())
    }
}

/// Keeps every message in memory; useful for dry runs and tests.
#[derive(Debug, Default, Clone)]
pub struct RecordingSink {
    pub messages: Vec<OscMessage>,
}

impl CommandSink for RecordingSink {
    fn send_message(&mut self, msg: &OscMessage) -> Result<(), OscError> {
        encode(msg)?;
        self.messages.push(msg.clone());
        Ok(())
    }
}

pub fn send_position(
    cmd: &PositionCommand,
    schema: &AddressSchema,
    sender: &OscSender,
) -> Result<usize, OscError> {
    sender.send(&schema.position_message(cmd)?)
}

pub fn send_trajectory(
    cmd: &TrajectoryCommand,
    schema: &AddressSchema,
    sender: &OscSender,
) -> Result<usize, OscError> {
    sender.send(&schema.trajectory_message(cmd)?)
}

/// Serializes sends from several threads through one worker-owned socket.
///
/// Messages leave in the order they were queued. Dropping the last queue
/// handle and calling [`OscQueue::shutdown`] joins the worker.
#[derive(Debug, Clone)]
pub struct OscQueue {
    tx: mpsc::Sender<OscMessage>,
}

impl OscQueue {
    pub fn spawn(sender: OscSender) -> (Self, JoinHandle<Result<usize, OscError>>) {
        let (tx, rx) = mpsc::channel::<OscMessage>();
        let handle = std::thread::spawn(move || {
            let mut sent = 0;
            for msg in rx {
                sender.send(&msg)?;
                sent += 1;
            }
            Ok(sent)
        });
        (Self { tx }, handle)
    }

    pub fn push(&self, msg: OscMessage) -> Result<(), OscError> {
        self.tx.send(msg).map_err(|_| OscError::QueueClosed)
    }

    pub fn shutdown(self) {
        drop(self.tx);
    }
}

impl CommandSink for OscQueue {
    fn send_message(&mut self, msg: &OscMessage) -> Result<(), OscError> {
        encode(msg)?;
        self.push(msg.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn endpoint_parsing() {
        assert!(parse_endpoint("127.0.0.1:9000").is_ok());
        assert!(matches!(
            parse_endpoint("not an endpoint"),
            Err(OscError::Endpoint(_))
        ));
        assert!(parse_endpoint("127.0.0.1").is_err());
    }

    #[test]
    fn recording_sink_validates() {
        let mut sink = RecordingSink::default();
        assert!(sink.send_message(&OscMessage::new("bad", vec![])).is_err());
        sink.send_message(&OscMessage::new("/ok", vec![])).unwrap();
        assert_eq!(sink.messages.len(), 1);
    }
}
