use proptest::prelude::*;
use tiui_core::gesture::{Phase, PointerSample};
use tiui_core::trace::{parse_trace, write_trace, TraceFileError};
use tiui_core::wire::{decode, encode, Ack, Body, Bye, DecodeError, ErrorBody, StreamDecoder, WireMessage};

fn sample() -> impl Strategy<Value = PointerSample> {
    (
        0u32..8,
        prop::sample::select(vec![Phase::Down, Phase::Move, Phase::Up]),
        -1e7..1e7f64,
        -1e7..1e7f64,
        any::<u64>(),
    )
        .prop_map(|(id, phase, x, y, t)| PointerSample::new(id, phase, x, y, t))
}

fn message() -> impl Strategy<Value = WireMessage> {
    let body = prop_oneof![
        sample().prop_map(Body::Pointer),
        any::<u64>().prop_map(|ack_seq| Body::Ack(Ack { ack_seq })),
        (".*", ".*").prop_map(|(code, message)| Body::Error(ErrorBody { code, message })),
        ".*".prop_map(|reason| Body::Bye(Bye { reason })),
    ];
    (".{0,12}", any::<u64>(), body).prop_map(|(s, seq, body)| WireMessage::new(s, seq, body))
}

proptest! {
    #[test]
    fn framed_messages_round_trip(msgs in prop::collection::vec(message(), 1..20), cut in any::<prop::sample::Index>()) {
        let mut stream = Vec::new();
        for m in &msgs {
            let bytes = encode(m).unwrap();
            let (back, used) = decode(&bytes).unwrap();
            prop_assert_eq!(&back, m);
            prop_assert_eq!(used, bytes.len());
            stream.extend(bytes);
        }
        // Split once anywhere; the decoder must wait, then resume.
        let at = cut.index(stream.len() + 1);
        let mut dec = StreamDecoder::default();
        let mut got = Vec::new();
        for part in [&stream[..at], &stream[at..]] {
            dec.push(part);
            while let Some(m) = dec.next_message().unwrap() {
                got.push(m);
            }
        }
        prop_assert_eq!(got, msgs);
        prop_assert_eq!(dec.buffered(), 0);
    }

    #[test]
    fn every_strict_prefix_is_truncated(m in message()) {
        let bytes = encode(&m).unwrap();
        for n in 1..bytes.len() {
            match decode(&bytes[..n]) {
                Err(DecodeError::Truncated { .. }) => {}
                other => prop_assert!(false, "prefix {} of {}: {:?}", n, bytes.len(), other),
            }
        }
    }

    #[test]
    fn arbitrary_bytes_never_panic(bytes in prop::collection::vec(any::<u8>(), 0..200)) {
        if let Err(e) = decode(&bytes) {
            prop_assert!(e.offset() <= bytes.len().max(20));
        }
    }

    #[test]
    fn traces_round_trip(samples in prop::collection::vec(sample(), 0..50)) {
        prop_assert_eq!(parse_trace(&write_trace(&samples)).unwrap(), samples);
    }
}

#[test]
fn wire_shape_is_a_typed_envelope() {
    let msg = WireMessage::new("s1", 7, Body::Ack(Ack { ack_seq: 6 }));
    let bytes = encode(&msg).unwrap();
    let text = String::from_utf8(bytes).unwrap();
    let (len, rest) = text.split_once('\n').unwrap();
    let json = rest.strip_suffix('\n').unwrap();
    assert_eq!(len.parse::<usize>().unwrap(), json.len());
    let v: serde_json::Value = serde_json::from_str(json).unwrap();
    assert_eq!(
        v,
        serde_json::json!({"type": "Ack", "session_id": "s1", "seq": 7, "payload": {"ack_seq": 6}})
    );
}

#[test]
fn malformed_frames_report_where() {
    assert_eq!(decode(b"x5\n").unwrap_err(), DecodeError::BadHeader { offset: 0 });
    assert!(matches!(
        decode(b"3\n{}}!").unwrap_err(),
        DecodeError::MissingTerminator { offset: 5 }
    ));
    let e = decode(b"9\n{\"type\":}\n").unwrap_err();
    assert!(matches!(e, DecodeError::Json { .. }), "{e:?}");
    assert!(e.offset() >= 2);
    let unknown = br#"{"type":"Teleport","session_id":"","seq":1,"payload":{}}"#;
    let framed = [unknown.len().to_string().as_bytes(), b"\n", unknown, b"\n"].concat();
    assert!(matches!(
        decode(&framed).unwrap_err(),
        DecodeError::Payload { offset: 3, .. }
    ));
    assert!(matches!(
        decode(b"99999999999\n").unwrap_err(),
        DecodeError::TooLarge { .. }
    ));
}

#[test]
fn trace_files_check_their_header() {
    assert_eq!(parse_trace("").unwrap_err(), TraceFileError::MissingHeader);
    assert_eq!(
        parse_trace("# tiui-trace v2\n0 down 1 2 3\n").unwrap_err(),
        TraceFileError::VersionMismatch { found: "v2".into() }
    );
    let e = parse_trace("# tiui-trace v1\n0 hover 1 2 3\n").unwrap_err();
    assert!(matches!(e, TraceFileError::Syntax { line: 2, .. }), "{e:?}");
    let ok = parse_trace("# tiui-trace v1\n# comment\n\n1 up 1.5 -2 30\n").unwrap();
    assert_eq!(ok, vec![PointerSample::new(1, Phase::Up, 1.5, -2.0, 30)]);
}
