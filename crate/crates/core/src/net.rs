//! Length-prefixed binary protocol, a threaded TCP server, and a client
//! that runs one RCS retrieval per connection.
//!
//! Frame: `tag: u8`, `length: u32`, `payload: [u8; length]`. All integers
//! are big-endian and field elements travel as fixed-width u64.
//!
//! | tag  | payload |
//! |------|---------|
//! | 0x01 | `K: u16, M: u16`, then K/(M+1) parts of M+1 `u16` ids, canonical order |
//! | 0x02 | `K: u16, M: u16, q: u64`, then K `u64` evaluation points |
//! | 0x03 | `count: u16, n: u16, q: u64`, then count*n `u64` symbols |
//! | 0x04 | one reason byte, see [`ErrorCode`] |
//!
//! Message ids on the wire are 0-based.

use std::io::{self, Read, Write};
use std::net::{Shutdown, SocketAddr, TcpListener, TcpStream, ToSocketAddrs};
use std::path::Path;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::thread::{self, JoinHandle};
use std::time::Duration;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::field::{MessageVector, PrimeField};
use crate::pmf::{DemandModel, DemandRealization, PopularityProfile, ProblemParams};
use crate::schemes::{
    mds_answer, pc_answer, rcs_plan, Answer, Dataset, MdsQuery, PartitionQuery, Query, RcsSelector,
    SchemeKind, SideInfo,
};

pub const MAX_FRAME: usize = 16 * 1024 * 1024;
pub const FRAME_HEADER: usize = 5;
/// Fixed bytes ahead of the symbols in an answer payload.
pub const ANSWER_HEADER: usize = 12;

const IO_TIMEOUT: Duration = Duration::from_secs(30);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum FrameKind {
    QueryPartition = 0x01,
    QueryMds = 0x02,
    Answer = 0x03,
    Error = 0x04,
}

impl FrameKind {
    pub fn from_tag(tag: u8) -> Option<Self> {
        match tag {
            0x01 => Some(Self::QueryPartition),
            0x02 => Some(Self::QueryMds),
            0x03 => Some(Self::Answer),
            0x04 => Some(Self::Error),
            _ => None,
        }
    }
}

/// Reason carried by an error frame.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum ErrorCode {
    UnknownTag = 1,
    Malformed = 2,
    DimensionMismatch = 3,
    Oversized = 4,
    UnexpectedKind = 5,
}

impl ErrorCode {
    pub fn from_byte(b: u8) -> Option<Self> {
        match b {
            1 => Some(Self::UnknownTag),
            2 => Some(Self::Malformed),
            3 => Some(Self::DimensionMismatch),
            4 => Some(Self::Oversized),
            5 => Some(Self::UnexpectedKind),
            _ => None,
        }
    }

    pub fn describe(self) -> &'static str {
        match self {
            Self::UnknownTag => "unknown frame tag",
            Self::Malformed => "malformed payload",
            Self::DimensionMismatch => "query does not match the dataset",
            Self::Oversized => "frame exceeds size limit",
            Self::UnexpectedKind => "frame kind not valid here",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Frame {
    pub kind: FrameKind,
    pub payload: Vec<u8>,
}

impl Frame {
    pub fn new(kind: FrameKind, payload: Vec<u8>) -> Result<Self> {
        if payload.len() > MAX_FRAME {
            return Err(Error::Encoding(format!(
                "payload of {} bytes exceeds {MAX_FRAME}",
                payload.len()
            )));
        }
        Ok(Self { kind, payload })
    }

    pub fn error(code: ErrorCode) -> Self {
        Self {
            kind: FrameKind::Error,
            payload: vec![code as u8],
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(FRAME_HEADER + self.payload.len());
        out.push(self.kind as u8);
        out.extend_from_slice(&(self.payload.len() as u32).to_be_bytes());
        out.extend_from_slice(&self.payload);
        out
    }

    pub fn write_to(&self, w: &mut impl Write) -> io::Result<()> {
        w.write_all(&self.to_bytes())?;
        w.flush()
    }
}

/// Why a frame could not be read.
#[derive(Debug)]
pub enum ReadError {
    UnknownTag(u8),
    Oversized(usize),
    /// The stream ended inside a frame.
    Truncated,
    Io(io::Error),
}

impl ReadError {
    fn code(&self) -> Option<ErrorCode> {
        match self {
            ReadError::UnknownTag(_) => Some(ErrorCode::UnknownTag),
            ReadError::Oversized(_) => Some(ErrorCode::Oversized),
            ReadError::Truncated => Some(ErrorCode::Malformed),
            ReadError::Io(_) => None,
        }
    }
}

impl From<ReadError> for Error {
    fn from(e: ReadError) -> Self {
        match e {
            ReadError::UnknownTag(t) => Error::Protocol(format!("unknown frame tag 0x{t:02x}")),
            ReadError::Oversized(n) => {
                Error::Protocol(format!("frame of {n} bytes exceeds {MAX_FRAME}"))
            }
            ReadError::Truncated => Error::Protocol("stream ended inside a frame".into()),
            ReadError::Io(e) => Error::network("reading frame", e),
        }
    }
}

fn read_exact_or(r: &mut impl Read, buf: &mut [u8]) -> std::result::Result<(), ReadError> {
    r.read_exact(buf).map_err(|e| match e.kind() {
        io::ErrorKind::UnexpectedEof => ReadError::Truncated,
        _ => ReadError::Io(e),
    })
}

/// Reads one frame, checking the tag before the length.
pub fn read_frame(r: &mut impl Read) -> std::result::Result<Frame, ReadError> {
    let mut tag = [0u8; 1];
    read_exact_or(r, &mut tag)?;
    let kind = FrameKind::from_tag(tag[0]).ok_or(ReadError::UnknownTag(tag[0]))?;
    let mut len = [0u8; 4];
    read_exact_or(r, &mut len)?;
    let len = u32::from_be_bytes(len) as usize;
    if len > MAX_FRAME {
        return Err(ReadError::Oversized(len));
    }
    let mut payload = vec![0u8; len];
    read_exact_or(r, &mut payload)?;
    Ok(Frame { kind, payload })
}

fn u16_of(v: usize, what: &str) -> Result<u16> {
    u16::try_from(v).map_err(|_| Error::Encoding(format!("{what} = {v} does not fit in u16")))
}

/// Sequential big-endian reader over a payload.
struct Cursor<'a> {
    buf: &'a [u8],
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.buf.len() < n {
            return Err(Error::Protocol(
                "payload shorter than its header declares".into(),
            ));
        }
        let (head, tail) = self.buf.split_at(n);
        self.buf = tail;
        Ok(head)
    }

    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_be_bytes(
            self.take(2)?.try_into().expect("2 bytes"),
        ))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_be_bytes(
            self.take(8)?.try_into().expect("8 bytes"),
        ))
    }

    fn finish(self) -> Result<()> {
        if self.buf.is_empty() {
            Ok(())
        } else {
            Err(Error::Protocol(format!(
                "{} trailing payload bytes",
                self.buf.len()
            )))
        }
    }
}

pub fn encode_query(query: &Query) -> Result<Frame> {
    let mut out = Vec::new();
    out.extend_from_slice(&u16_of(query.k(), "K")?.to_be_bytes());
    out.extend_from_slice(&u16_of(query.m(), "M")?.to_be_bytes());
    match query {
        Query::Partition(q) => {
            for &id in q.parts().iter().flatten() {
                out.extend_from_slice(&u16_of(id, "message id")?.to_be_bytes());
            }
            Frame::new(FrameKind::QueryPartition, out)
        }
        Query::Mds(q) => {
            out.extend_from_slice(&q.field().order().to_be_bytes());
            for w in q.omegas() {
                out.extend_from_slice(&w.value().to_be_bytes());
            }
            Frame::new(FrameKind::QueryMds, out)
        }
    }
}

pub fn decode_query(frame: &Frame) -> Result<Query> {
    let mut c = Cursor {
        buf: &frame.payload,
    };
    let k = c.u16()? as usize;
    let m = c.u16()? as usize;
    let malformed = |e: Error| Error::Protocol(e.to_string());
    match frame.kind {
        FrameKind::QueryPartition => {
            let block = m + 1;
            if m == 0 || k == 0 || !k.is_multiple_of(block) {
                return Err(Error::Protocol(format!("K={k}, M={m} admit no partition")));
            }
            let parts = (0..k / block)
                .map(|_| (0..block).map(|_| c.u16().map(usize::from)).collect())
                .collect::<Result<Vec<Vec<usize>>>>()?;
            c.finish()?;
            let q = PartitionQuery::new(k, m, parts.clone()).map_err(malformed)?;
            if q.parts() != parts.as_slice() {
                return Err(Error::Protocol("partition is not in canonical form".into()));
            }
            Ok(Query::Partition(q))
        }
        FrameKind::QueryMds => {
            let field = PrimeField::new(c.u64()?).map_err(malformed)?;
            let omegas = (0..k)
                .map(|_| field.canonical(c.u64()?).map_err(malformed))
                .collect::<Result<Vec<_>>>()?;
            c.finish()?;
            Ok(Query::Mds(
                MdsQuery::new(field, m, omegas).map_err(malformed)?,
            ))
        }
        other => Err(Error::Protocol(format!(
            "expected a query frame, got {other:?}"
        ))),
    }
}

pub fn encode_answer(answer: &Answer) -> Result<Frame> {
    let first = answer
        .combos()
        .first()
        .ok_or_else(|| Error::Encoding("empty answer".into()))?;
    let mut out = Vec::with_capacity(ANSWER_HEADER + answer.len() * first.len() * 8);
    out.extend_from_slice(&u16_of(answer.len(), "combination count")?.to_be_bytes());
    out.extend_from_slice(&u16_of(first.len(), "n")?.to_be_bytes());
    out.extend_from_slice(&first.field().order().to_be_bytes());
    for combo in answer.combos() {
        for v in combo.values() {
            out.extend_from_slice(&v.to_be_bytes());
        }
    }
    Frame::new(FrameKind::Answer, out)
}

pub fn decode_answer(frame: &Frame) -> Result<Answer> {
    if frame.kind != FrameKind::Answer {
        return Err(Error::Protocol(format!(
            "expected an answer frame, got {:?}",
            frame.kind
        )));
    }
    let mut c = Cursor {
        buf: &frame.payload,
    };
    let count = c.u16()? as usize;
    let n = c.u16()? as usize;
    let field = PrimeField::new(c.u64()?).map_err(|e| Error::Protocol(e.to_string()))?;
    if count == 0 || n == 0 {
        return Err(Error::Protocol("answer with no symbols".into()));
    }
    let combos = (0..count)
        .map(|_| {
            let coords = (0..n)
                .map(|_| {
                    field
                        .canonical(c.u64()?)
                        .map_err(|e| Error::Protocol(e.to_string()))
                })
                .collect::<Result<Vec<_>>>()?;
            MessageVector::from_elements(field, coords)
        })
        .collect::<Result<Vec<_>>>()?;
    c.finish()?;
    Answer::new(combos)
}

/// Dataset file: `K: u16, n: u16, q: u64`, then K*n `u64` symbols.
pub fn encode_dataset(data: &Dataset) -> Result<Vec<u8>> {
    let mut out = Vec::with_capacity(12 + data.k() * data.n() * 8);
    out.extend_from_slice(&u16_of(data.k(), "K")?.to_be_bytes());
    out.extend_from_slice(&u16_of(data.n(), "n")?.to_be_bytes());
    out.extend_from_slice(&data.field().order().to_be_bytes());
    for x in data.messages() {
        for v in x.values() {
            out.extend_from_slice(&v.to_be_bytes());
        }
    }
    Ok(out)
}

pub fn decode_dataset(bytes: &[u8]) -> Result<Dataset> {
    let mut c = Cursor { buf: bytes };
    let bad = |e: Error| Error::Parse(format!("dataset file: {e}"));
    let k = c.u16().map_err(bad)? as usize;
    let n = c.u16().map_err(bad)? as usize;
    let field = PrimeField::new(c.u64().map_err(bad)?).map_err(bad)?;
    let messages = (0..k)
        .map(|_| {
            let coords = (0..n)
                .map(|_| field.canonical(c.u64().map_err(bad)?).map_err(bad))
                .collect::<Result<Vec<_>>>()?;
            MessageVector::from_elements(field, coords)
        })
        .collect::<Result<Vec<_>>>()?;
    c.finish().map_err(bad)?;
    Dataset::new(field, messages)
}

pub fn save_dataset(data: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, encode_dataset(data)?).map_err(|e| Error::io(path, e))
}

pub fn load_dataset(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    decode_dataset(&std::fs::read(path).map_err(|e| Error::io(path, e))?)
}

/// The server's whole view of a request: the query value and nothing else.
pub fn handle_query(data: &Dataset, query: &Query) -> std::result::Result<Answer, ErrorCode> {
    let fits = match query {
        Query::Partition(q) => q.k() == data.k(),
        Query::Mds(q) => q.k() == data.k() && q.field() == data.field(),
    };
    if !fits {
        return Err(ErrorCode::DimensionMismatch);
    }
    match query {
        Query::Partition(q) => pc_answer(q, data),
        Query::Mds(q) => mds_answer(q, data),
    }
    .map_err(|_| ErrorCode::DimensionMismatch)
}

/// Reads one request from `stream` and writes one reply.
fn handle_connection(mut stream: TcpStream, data: &Dataset) -> io::Result<()> {
    stream.set_read_timeout(Some(IO_TIMEOUT))?;
    stream.set_write_timeout(Some(IO_TIMEOUT))?;
    let reply = match read_frame(&mut stream) {
        Ok(frame) => match frame.kind {
            FrameKind::QueryPartition | FrameKind::QueryMds => match decode_query(&frame) {
                Ok(query) => match handle_query(data, &query).map(|a| encode_answer(&a)) {
                    Ok(Ok(frame)) => frame,
                    Ok(Err(_)) => Frame::error(ErrorCode::Oversized),
                    Err(code) => Frame::error(code),
                },
                Err(_) => Frame::error(ErrorCode::Malformed),
            },
            _ => Frame::error(ErrorCode::UnexpectedKind),
        },
        Err(e) => match e.code() {
            Some(code) => Frame::error(code),
            None => return Ok(()),
        },
    };
    reply.write_to(&mut stream)?;
    // drain unread input so closing does not reset the connection
    stream.shutdown(Shutdown::Write)?;
    stream.set_read_timeout(Some(Duration::from_secs(1)))?;
    let _ = io::copy(&mut (&stream).take(MAX_FRAME as u64), &mut io::sink());
    Ok(())
}

/// A running server; dropping it (or calling [`Server::shutdown`]) stops
/// accepting and joins the accept loop.
pub struct Server {
    addr: SocketAddr,
    stop: Arc<AtomicBool>,
    accept: Option<JoinHandle<()>>,
}

impl Server {
    /// Binds `addr` and serves `data` on a background thread, one thread
    /// per connection.
    pub fn spawn(data: Dataset, addr: impl ToSocketAddrs) -> Result<Self> {
        let listener = TcpListener::bind(addr).map_err(|e| Error::network("binding", e))?;
        let local = listener
            .local_addr()
            .map_err(|e| Error::network("binding", e))?;
        let stop = Arc::new(AtomicBool::new(false));
        let flag = Arc::clone(&stop);
        let data = Arc::new(data);
        let accept = thread::spawn(move || serve(listener, data, flag));
        Ok(Self {
            addr: local,
            stop,
            accept: Some(accept),
        })
    }

    pub fn local_addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn shutdown(mut self) {
        self.stop_and_join();
    }

    fn stop_and_join(&mut self) {
        if let Some(handle) = self.accept.take() {
            self.stop.store(true, Ordering::SeqCst);
            // wake the blocking accept
            let _ = TcpStream::connect(self.addr);
            let _ = handle.join();
        }
    }
}

impl Drop for Server {
    fn drop(&mut self) {
        self.stop_and_join();
    }
}

/// Accept loop; returns once `stop` is set and a connection arrives.
pub fn serve(listener: TcpListener, data: Arc<Dataset>, stop: Arc<AtomicBool>) {
    for conn in listener.incoming() {
        if stop.load(Ordering::SeqCst) {
            break;
        }
        let Ok(stream) = conn else { continue };
        let data = Arc::clone(&data);
        thread::spawn(move || {
            let _ = handle_connection(stream, &data);
        });
    }
}

/// Sends one frame and reads the reply over a fresh connection.
pub fn exchange(addr: impl ToSocketAddrs, frame: &Frame) -> Result<Frame> {
    let mut stream = TcpStream::connect(addr).map_err(|e| Error::network("connecting", e))?;
    stream
        .set_read_timeout(Some(IO_TIMEOUT))
        .and_then(|_| stream.set_write_timeout(Some(IO_TIMEOUT)))
        .map_err(|e| Error::network("configuring socket", e))?;
    frame
        .write_to(&mut stream)
        .map_err(|e| Error::network("sending", e))?;
    read_frame(&mut stream).map_err(|e| match e {
        ReadError::Truncated => Error::DecodeInconsistency("reply ended early".into()),
        other => other.into(),
    })
}

/// Result of one networked retrieval.
#[derive(Clone, Debug)]
pub struct FetchOutcome {
    pub value: MessageVector,
    pub scheme: SchemeKind,
    pub query: Query,
    /// Bytes of the query frame sent.
    pub upload_bytes: usize,
    /// Bytes of the answer frame received.
    pub download_bytes: usize,
}

/// Client side of the protocol. Holds the popularity model and runs the
/// scheme selection locally; only the query value leaves the process.
pub struct Client {
    addr: SocketAddr,
    params: ProblemParams,
    model: DemandModel,
    selector: RcsSelector,
}

impl Client {
    pub fn new(
        addr: impl ToSocketAddrs,
        params: ProblemParams,
        profile: PopularityProfile,
    ) -> Result<Self> {
        let addr = addr
            .to_socket_addrs()
            .map_err(|e| Error::network("resolving address", e))?
            .next()
            .ok_or_else(|| Error::usage("address resolved to nothing"))?;
        if profile.len() != params.k() {
            return Err(Error::usage(format!(
                "profile has {} entries, K={}",
                profile.len(),
                params.k()
            )));
        }
        let model = DemandModel::new(profile, params.m())?;
        let selector = RcsSelector::new(&model)?;
        Ok(Self {
            addr,
            params,
            model,
            selector,
        })
    }

    pub fn params(&self) -> &ProblemParams {
        &self.params
    }

    pub fn selector(&self) -> &RcsSelector {
        &self.selector
    }

    /// Sends `query` and returns the checked answer plus the frame sizes.
    pub fn send_query(&self, query: &Query) -> Result<(Answer, usize, usize)> {
        let frame = encode_query(query)?;
        let reply = exchange(self.addr, &frame)?;
        let down = FRAME_HEADER + reply.payload.len();
        match reply.kind {
            FrameKind::Answer => {}
            FrameKind::Error => {
                let code = reply
                    .payload
                    .first()
                    .copied()
                    .and_then(ErrorCode::from_byte);
                return Err(Error::Remote(match code {
                    Some(c) => c.describe().to_string(),
                    None => "unrecognised reason code".to_string(),
                }));
            }
            other => return Err(Error::Protocol(format!("unexpected reply kind {other:?}"))),
        }
        let answer = decode_answer(&reply).map_err(|e| match e {
            Error::Protocol(msg) => Error::DecodeInconsistency(msg),
            other => other,
        })?;
        let first = &answer.combos()[0];
        if answer.len() != query.answer_len() || first.len() != self.params.n() {
            return Err(Error::DecodeInconsistency(format!(
                "expected {} combinations of length {}, got {} of length {}",
                query.answer_len(),
                self.params.n(),
                answer.len(),
                first.len()
            )));
        }
        if first.field() != self.params.field() {
            return Err(Error::DecodeInconsistency(format!(
                "answer over GF({}), expected GF({})",
                first.field().order(),
                self.params.field().order()
            )));
        }
        Ok((answer, frame.payload.len() + FRAME_HEADER, down))
    }

    /// Retrieves X_W for `realization` (caller ids) using `side_info`.
    pub fn fetch(
        &self,
        realization: &DemandRealization,
        side_info: &SideInfo,
        seed: u64,
    ) -> Result<FetchOutcome> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let plan = rcs_plan(
            &self.selector,
            &self.model,
            &self.params,
            realization,
            &mut rng,
        )?;
        let (answer, up, down) = self.send_query(&plan.query)?;
        let value = plan
            .decode(&answer, realization, side_info)
            .map_err(|e| Error::DecodeInconsistency(e.to_string()))?;
        Ok(FetchOutcome {
            value,
            scheme: plan.scheme(),
            query: plan.query,
            upload_bytes: up,
            download_bytes: down,
        })
    }
}
