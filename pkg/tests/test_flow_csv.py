"""
Unit tests for the labelled flow CSV reader and its dataset presets.

Run with: pytest tests/test_flow_csv.py
"""

import json

import pandas as pd
import pytest
from pydantic import ValidationError

from src.errors import SchemaError
from src.flows.flow_csv import (
    PRESETS,
    FlowCsvMapping,
    load_mapping,
    parse_count,
    parse_flow_csv_file,
    parse_flow_csv_files,
    parse_port,
    parse_proto,
)
from src.flows.records import Proto
from src.main import main

BOT_IOT = "\n".join([
    "pkSeqID,stime,flgs,proto,saddr,sport,daddr,dport,state,dur,spkts,dpkts,sbytes,dbytes,attack,category,subcategory",
    "1,1528089600.5,e,tcp,192.168.100.1,0x0050,192.168.100.3,443,REQ,0.5,2,2,200,180,0,Normal,Normal",
    "2,1528089601.5,e,udp,192.168.100.147,53,192.168.100.3,80,INT,1.25,4,0,480,0,1,DoS,UDP",
    "3,1528089602.5,e,tcp,192.168.100.147,abc,192.168.100.3,80,REQ,0.1,1,1,60,60,1,DoS,TCP",
    "4,1528089603.5,e,tcp,192.168.100.147,4000,192.168.100.3,80,REQ,nan,1,1,60,60,1,DoS,TCP",
    "5,1528089604.5,e,tcp,192.168.100.150,4001,192.168.100.3,80,REQ,0.2,3,2,300,900,1,DDoS,HTTP",
]) + "\n"

IOT_NI = "\n".join([
    "Flow_ID,Src_IP,Src_Port,Dst_IP,Dst_Port,Protocol,Timestamp,Flow_Duration,"
    "Tot_Fwd_Pkts,Tot_Bwd_Pkts,TotLen_Fwd_Pkts,TotLen_Bwd_Pkts,Label,Cat,Sub_Cat",
    "f1,192.168.0.13,554,192.168.0.16,10000,17,25/07/2019 03:25:53,75,1,1,0,0,Normal,Normal,Normal",
    "f2,192.168.0.24,9020,192.168.0.13,49784,6,25/07/2019 03:25:55,1500000,2,1,12.0,0,Anomaly,Mirai,Mirai-Ackflooding",
    "f3,192.168.0.24,9020,192.168.0.13,49785,6,not a date,10,1,1,0,0,Anomaly,Scan,Scan Port OS",
]) + "\n"

MQTTSET = "\n".join([
    "tcp.flags,tcp.time_delta,tcp.len,mqtt.msgtype,target",
    "0x00000018,0.01,10,3,legitimate",
    "0x00000018,0.002,120,3,flood",
    "0x00000018,0.5,2,12,slowite",
]) + "\n"

MQTT_FLOWS = "\n".join([
    "ip_src,ip_dst,prt_src,prt_dst,proto,fwd_num_pkts,bwd_num_pkts,fwd_num_bytes,bwd_num_bytes",
    "192.168.2.5,192.168.2.1,41234,1883,6,10,8,640,512",
    "192.168.2.5,192.168.2.1,41236,1883,6,12,9,700,530",
]) + "\n"


@pytest.fixture
def bot_iot_path(tmp_path):
    path = tmp_path / "bot_iot.csv"
    path.write_text(BOT_IOT, encoding="utf-8")
    return path


def test_bot_iot_preset(bot_iot_path):
    """Columns map onto record fields; bad rows are skipped with CSV line numbers."""
    result = parse_flow_csv_file(bot_iot_path, PRESETS["bot-iot"])

    assert [r.uid for r in result.records] == ["1", "2", "5"]
    assert sorted(e.line_number for e in result.errors) == [4, 5], "Header is line 1"
    first = result.records[0]
    assert first.orig_port == 80, "0x-prefixed ports are hexadecimal"
    assert first.ts == 1528089600.5
    assert (first.orig_bytes, first.resp_bytes, first.orig_pkts, first.resp_pkts) == (200, 180, 2, 2)
    assert first.conn_state == "REQ"
    assert result.records[1].proto is Proto.UDP


def test_bot_iot_labels_join_category_and_subcategory(bot_iot_path):
    records = parse_flow_csv_file(bot_iot_path, PRESETS["bot-iot"]).records

    assert [r.label for r in records] == ["Benign", "DoS-UDP", "DDoS-HTTP"]
    assert records[0].label_raw == "Normal Normal", "Raw label keeps every label column"


def test_iot_ni_preset(tmp_path):
    """Day-first dates become epoch seconds, microsecond durations become seconds, protocols are IANA numbers."""
    path = tmp_path / "iot_ni.csv"
    path.write_text(IOT_NI, encoding="utf-8")

    result = parse_flow_csv_file(path, PRESETS["iot-ni"])
    first, second = result.records

    assert first.ts == pd.Timestamp("2019-07-25 03:25:53").timestamp()
    assert second.ts - first.ts == 2.0
    assert first.duration == pytest.approx(75e-6)
    assert second.duration == pytest.approx(1.5)
    assert first.proto is Proto.UDP and second.proto is Proto.TCP
    assert second.orig_bytes == 12, "Integral floats are accepted for counts"
    assert [r.label for r in result.records] == ["Benign", "Mirai"]
    assert result.errors[0].line_number == 4, "An unparseable date skips the row"


def test_mqttset_preset(tmp_path):
    """Rows without addresses keep row order as time; targets map to the published class names."""
    path = tmp_path / "mqttset.csv"
    path.write_text(MQTTSET, encoding="utf-8")

    records = parse_flow_csv_file(path, PRESETS["mqttset"]).records

    assert [r.label for r in records] == ["Benign", "MQTTFlood", "SlowITe"]
    assert [r.ts for r in records] == [0.0, 1.0, 2.0]
    assert all(r.proto is Proto.TCP for r in records), "Every row defaults to TCP"
    assert records[0].uid == "mqttset.csv:2", "Missing uids are generated from the file and line"
    assert records[0].orig_host == "-" and records[0].orig_port is None


def test_mqtt_file_labels(tmp_path):
    """Without a label column the longest matching file prefix names the class."""
    brute = tmp_path / "mqtt_bruteforce.csv"
    normal = tmp_path / "normal.csv"
    for path in (brute, normal):
        path.write_text(MQTT_FLOWS, encoding="utf-8")

    attack, benign = parse_flow_csv_files([brute, normal], PRESETS["mqtt"], workers=2)

    assert {r.label for r in attack.records} == {"MQTT-Brute-Force-attack"}
    assert {r.label for r in benign.records} == {"Benign"}
    assert attack.source == str(brute), "Results keep path order"
    assert attack.records[0].resp_port == 1883


def test_unmatched_file_label(tmp_path):
    path = tmp_path / "capture.csv"
    path.write_text(MQTT_FLOWS, encoding="utf-8")

    with pytest.raises(SchemaError):
        parse_flow_csv_file(path, PRESETS["mqtt"])


def test_missing_mapped_column(tmp_path):
    path = tmp_path / "short.csv"
    path.write_text("saddr,daddr,category\n1.1.1.1,2.2.2.2,Normal\n", encoding="utf-8")

    with pytest.raises(SchemaError, match="stime"):
        parse_flow_csv_file(path, PRESETS["bot-iot"])


def test_value_parsers():
    assert parse_port("0x1bb") == 443
    assert parse_port("-") is None
    assert parse_count("12.0") == 12
    with pytest.raises(ValueError):
        parse_count("1.5")
    with pytest.raises(ValueError):
        parse_count("nan")
    assert parse_proto("17") is Proto.UDP
    assert parse_proto("arp") is Proto.OTHER
    assert parse_proto("", Proto.TCP) is Proto.TCP


def test_mapping_validation():
    """Unknown record fields and mappings with no label source are rejected."""
    with pytest.raises(ValidationError):
        FlowCsvMapping(columns={"ts": "t", "bytes": "b"}, label_columns=["y"])
    with pytest.raises(ValidationError):
        FlowCsvMapping(columns={"ts": "t"})
    with pytest.raises(ValidationError):
        FlowCsvMapping(columns={"orig_host": "src"}, label_columns=["y"])


def test_load_mapping_from_json(tmp_path):
    path = tmp_path / "mapping.json"
    path.write_text(json.dumps({
        "name": "lab", "columns": {"ts": "time", "orig_host": "src"}, "label_columns": ["class"],
        "label_map": {"bf": "Bruteforce"},
    }), encoding="utf-8")

    mapping = load_mapping(str(path))

    assert mapping.name == "lab"
    assert load_mapping("bot-iot") is PRESETS["bot-iot"]
    with pytest.raises(FileNotFoundError):
        load_mapping(str(tmp_path / "absent.json"))


def test_ingest_flow_csv(bot_iot_path, tmp_path):
    """ingest --format flow-csv writes the same artifacts as the Zeek path."""
    out = tmp_path / "ingest"
    code = main([
        "ingest", "--input", str(bot_iot_path), "--format", "flow-csv", "--mapping", "bot-iot", "--out", str(out),
    ])
    assert code == 0

    summary = json.loads((out / "ingest_summary.json").read_text())
    vocab = json.loads((out / "vocab.json").read_text())
    assert summary["records_written"] == 3
    assert summary["lines_skipped"] == 2
    assert summary["config"]["mapping"] == "bot-iot"
    assert vocab["names"][0] == "Benign" and vocab["benign_id"] == 0
    assert set(vocab["names"]) == {"Benign", "DoS-UDP", "DDoS-HTTP"}


def test_ingest_flow_csv_needs_mapping(bot_iot_path, tmp_path):
    code = main(["ingest", "--input", str(bot_iot_path), "--format", "flow-csv", "--out", str(tmp_path / "out")])

    assert code == 1
