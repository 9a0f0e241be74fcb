#!/usr/bin/env python3
"""Regenerate the bundled data: seed chord library, textures, micro-loss table,
style map, demo melody and MIDI melody fixtures.

Usage: python3 tools/gen_data.py [repo_root]
"""
import json
import random
import struct
import sys
from pathlib import Path

ROOT = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).resolve().parent.parent

# --- chord vocabulary (canonical keys: C major, A minor) -------------------------

MAJ_SCALE = [0, 2, 4, 5, 7, 9, 11]
MIN_SCALE = [9, 11, 0, 2, 4, 5, 7]

CHORDS = {
    "I": (0, "maj"), "ii": (2, "min"), "iii": (4, "min"), "IV": (5, "maj"),
    "V": (7, "maj"), "vi": (9, "min"), "bVII": (10, "maj"), "II": (2, "maj"),
    "i": (9, "min"), "III": (0, "maj"), "iv": (2, "min"), "v": (4, "min"),
    "Vm": (4, "maj"), "VI": (5, "maj"), "VII": (7, "maj"),
}

# Each entry: list of bars; a bar is one numeral or a pair (two half-bar chords).
MAJOR_4 = [
    "I V vi IV", "I vi IV V", "vi IV I V", "I IV V I", "I vi ii V", "IV V iii vi",
    "I iii IV V", "ii V I I", "I IV vi V", "IV I V vi", "I V IV I", "I bVII IV I",
    "vi V IV V", "I/V vi/IV I/V IV/V", "I ii/V I IV",
]
MAJOR_8 = [
    "I V vi iii IV I IV V", "I IV I V I IV V I", "vi IV I V vi IV V V",
    "I iii vi V IV I ii V", "IV V iii vi ii V I I", "I vi II V I IV V I",
    "I V vi IV I V IV I", "I vi IV V I vi IV V",
]
MINOR_4 = [
    "i VI III VII", "i iv v i", "i VII VI VII", "i iv VII III", "VI VII i i",
    "i iv Vm i", "i VI iv Vm", "iv v i i", "i/VII VI/VII i iv",
]
MINOR_8 = [
    "i VII VI Vm i VII VI Vm", "i iv VII III VI iv Vm i", "i VI III VII i VI Vm Vm",
    "VI VII i i VI VII Vm Vm",
]

# style -> (anticipation in slots (negative = delay), voicing flavour, velocity)
STYLE_RHYTHM = {
    "pop_standard": (0, "triad", 80),
    "pop_complex": (1, "seventh", 72),
    "dark": (2, "dark", 70),
    "rnb": (3, "ninth", 76),
    "unknown": (-1, "triad", 78),
}


def parse_skeleton(text):
    """Chord runs as (numeral, start_slot, end_slot) at 8 slots per bar."""
    runs = []
    for b, bar in enumerate(text.split()):
        parts = bar.split("/")
        width = 8 // len(parts)
        for k, numeral in enumerate(parts):
            start = b * 8 + k * width
            if runs and runs[-1][0] == numeral and runs[-1][2] == start:
                runs[-1] = (numeral, runs[-1][1], start + width)
            else:
                runs.append((numeral, start, start + width))
    return runs


def shift_runs(runs, anticipation):
    """Move every internal chord change earlier by `anticipation` slots."""
    out = []
    for i, (numeral, start, end) in enumerate(runs):
        s = start if i == 0 else start - anticipation
        e = end if i == len(runs) - 1 else end - anticipation
        out.append((numeral, s, e))
    return out


def place(pc, lo):
    """Lowest pitch >= lo with pitch class pc."""
    return lo + ((pc - lo) % 12)


def voicing_for(root, quality, flavour, scale):
    third = 4 if quality == "maj" else 3
    tones = [root, (root + third) % 12, (root + 7) % 12]
    if flavour in ("seventh", "ninth"):
        seventh = (root + 11) % 12 if (root + 11) % 12 in scale and quality == "maj" else (root + 10) % 12
        tones.append(seventh)
    if flavour == "ninth":
        tones.append((root + 2) % 12)
    if flavour == "dark":
        bass = place(root, 28)
        upper = sorted(place(pc, 48) for pc in tones)
    else:
        bass = place(root, 40)
        upper = sorted(place(pc, 55) for pc in tones)
    return [bass] + upper


def progression_and_voicing(runs, scale, flavour, velocity, slots):
    chords = [None] * slots
    voicing = []
    for numeral, s, e in runs:
        root, q = CHORDS[numeral]
        for k in range(s, e):
            chords[k] = [root, q]
        for p in voicing_for(root, q, flavour, scale):
            voicing.append([s, e - s, p, velocity])
    assert all(c is not None for c in chords)
    voicing.sort()
    return chords, voicing


def dedup_signature(chords, mode):
    first = chords[0][0]
    sig = ("M" if mode == "major" else "m") + str(len(chords)) + ":"
    for root, q in chords:
        sig += "0123456789ab"[(root - first) % 12] + ("M" if q == "maj" else "m")
    return sig


def seed_library():
    records = []
    seen = set()
    groups = [
        ("major", MAJ_SCALE, MAJOR_4, 4), ("major", MAJ_SCALE, MAJOR_8, 8),
        ("minor", MIN_SCALE, MINOR_4, 4), ("minor", MIN_SCALE, MINOR_8, 8),
    ]
    for mode, scale, skeletons, bars in groups:
        for idx, skel in enumerate(skeletons):
            styles = ["pop_standard", "pop_complex"]
            if mode == "minor":
                styles.append("dark")
            if idx % 3 == 0:
                styles.append("rnb")
            if idx % 5 == 4:
                styles.append("unknown")
            runs = parse_skeleton(skel)
            for style in styles:
                antic, flavour, vel = STYLE_RHYTHM[style]
                shifted = shift_runs(runs, antic)
                if any(e <= s for _, s, e in shifted):
                    continue
                chords, voicing = progression_and_voicing(shifted, scale, flavour, vel, bars * 8)
                sig = dedup_signature(chords, mode)
                if sig in seen:
                    continue
                seen.add(sig)
                tid = f"{mode[:3]}{bars}-{idx + 1:02d}-{style}"
                records.append({
                    "id": tid, "style": style, "mode": mode, "length_bars": bars,
                    "chords": chords, "voicing": voicing,
                    "source": f"seed:{skel.replace(' ', '-')}",
                })
    return records


# --- textures ------------------------------------------------------------------

TEXTURE_SOURCE = {4: "I vi IV V", 8: "I V vi IV I vi IV V"}


def texture_notes(pattern, runs, register):
    bass_lo = 36 + register
    mid_lo = 48 + register
    notes = []
    for numeral, s, e in runs:
        root, q = CHORDS[numeral]
        third = (root + (4 if q == "maj" else 3)) % 12
        fifth = (root + 7) % 12
        bass = place(root, bass_lo)
        r, t, f = place(root, mid_lo), place(third, mid_lo), place(fifth, mid_lo)
        triad = sorted([r, t, f])
        for bar_start in range(s, e, 8):
            if pattern == "block":
                notes += [[bar_start, 8, bass, 70]] + [[bar_start, 8, p, 62] for p in triad]
            elif pattern == "half":
                notes += [[bar_start, 8, bass, 70]] + [[bar_start + 4, 4, p, 60] for p in triad]
            elif pattern == "oompah":
                for k in (0, 4):
                    notes.append([bar_start + k, 2, bass, 72])
                for k in (2, 6):
                    notes += [[bar_start + k, 2, p, 60] for p in triad]
            elif pattern == "quarters":
                notes.append([bar_start, 8, bass, 70])
                for k, p in zip((0, 2, 4, 6), (triad[0], triad[1], triad[2], triad[1])):
                    notes.append([bar_start + k, 2, p + 12, 62])
            elif pattern == "alberti":
                notes.append([bar_start, 8, bass, 68])
                for k, p in enumerate([triad[0], triad[2], triad[1], triad[2]] * 2):
                    notes.append([bar_start + k, 1, p + 12, 58])
            elif pattern == "passing":
                scale_step = place((root + 2) % 12, mid_lo) + 12
                line = [triad[0] + 12, scale_step, triad[1] + 12, triad[2] + 12]
                for k in range(8):
                    notes.append([bar_start + k, 1, line[k % 4] if k < 4 else line[3 - (k % 4)], 60])
                notes.append([bar_start, 4, bass, 70])
                notes.append([bar_start + 4, 4, place(fifth, bass_lo), 66])
    notes.sort()
    return notes


def textures():
    plan = {"sparse": ["block", "half"], "medium": ["oompah", "quarters"], "dense": ["alberti", "passing"]}
    records = []
    for complexity, patterns in plan.items():
        for pattern in patterns:
            for register in (0, 3):
                for bars in (4, 8):
                    runs = parse_skeleton(TEXTURE_SOURCE[bars])
                    chords = [None] * (bars * 8)
                    for numeral, s, e in runs:
                        for k in range(s, e):
                            chords[k] = list(CHORDS[numeral])
                    records.append({
                        "id": f"{complexity}-{pattern}-{'low' if register == 0 else 'mid'}-{bars}",
                        "complexity": complexity, "length_bars": bars, "source_chords": chords,
                        "notes": texture_notes(pattern, runs, register),
                        "source": f"hand:{pattern}",
                    })
    return records


# --- micro-loss table (same construction as the built-in default) -------------

BY_INTERVAL = [0.0, 0.7, 0.5, 0.25, 0.25, 0.15, 0.9, 0.1, 0.35, 0.35, 0.5, 0.7]


def micro_table():
    out = {}
    for mode, steps in (("major", [0, 2, 4, 5, 7, 9, 11]), ("minor", [0, 2, 3, 5, 7, 8, 10])):
        rows = []
        for d in range(7):
            row = []
            for col in range(12):
                above = (col - steps[d]) % 12
                v = BY_INTERVAL[above]
                if mode == "minor" and d in (4, 6) and above not in (0, 3, 4, 7):
                    v = min(1.0, v + 0.1)
                row.append(round(v, 4))
            rows.append(row)
        out[mode] = rows
    out["non_diatonic_penalty"] = 0.6
    return out


# --- minimal SMF writer ----------------------------------------------------------

def vlq(v):
    out = [v & 0x7F]
    v >>= 7
    while v:
        out.append((v & 0x7F) | 0x80)
        v >>= 7
    return bytes(reversed(out))


def track_bytes(events, running_status=False):
    """events: (tick, bytes) with absolute ticks, already ordered."""
    body = bytearray()
    last = 0
    status = None
    for tick, data in events:
        body += vlq(tick - last)
        last = tick
        if running_status and data[0] < 0xF0 and data[0] == status:
            body += data[1:]
        else:
            body += data
            status = data[0] if data[0] < 0xF0 else None
    body += vlq(0) + b"\xFF\x2F\x00"
    return b"MTrk" + struct.pack(">I", len(body)) + bytes(body)


def smf(fmt, tpq, tracks, extra_chunk=None):
    out = b"MThd" + struct.pack(">IHHH", 6, fmt, len(tracks), tpq)
    for i, t in enumerate(tracks):
        if extra_chunk is not None and i == 1:
            out += extra_chunk
        out += t
    return out


def meta(kind, payload):
    return bytes([0xFF, kind]) + vlq(len(payload)) + payload


def note_events(notes, channel=0, vel0_off=False, tick_of=None):
    ev = []
    for on, off, pitch, vel in notes:
        ev.append((tick_of(off), 0, bytes([0x90 | channel, pitch, 0]) if vel0_off else bytes([0x80 | channel, pitch, 64])))
        ev.append((tick_of(on), 1, bytes([0x90 | channel, pitch, vel])))
    ev.sort(key=lambda e: (e[0], e[1]))
    return [(t, d) for t, _, d in ev]


def header_events(name, bpm=120, num=4, den=4):
    usec = round(60_000_000 / bpm)
    pow2 = {2: 1, 4: 2, 8: 3}[den]
    return [
        (0, meta(0x03, name.encode())),
        (0, meta(0x51, usec.to_bytes(3, "big"))),
        (0, meta(0x58, bytes([num, pow2, 24, 8]))),
    ]


# --- demo melody -----------------------------------------------------------------

DEG = {d: 72 + MAJ_SCALE[d % 7] + 12 * (d // 7) for d in range(-7, 15)}
PHRASE_A = [
    [(2, 2), (4, 2), (4, 2), (2, 2)], [(1, 2), (-1, 2), (1, 4)], [(0, 2), (2, 2), (5, 3), (4, 1)],
    [(3, 4), (5, 2), (3, 2)], [(2, 2), (4, 2), (7, 2), (6, 2)], [(4, 3), (6, 1), (8, 4)],
    [(5, 2), (3, 2), (1, 2), (3, 2)], [(2, 2), (1, 2), (0, 4)],
]
PHRASE_A2 = PHRASE_A[:7] + [[(2, 1), (1, 1), (-1, 2), (0, 4)]]
PHRASE_B = [
    [(5, 4), (4, 2), (2, 2)], [(3, 2), (5, 2), (7, 4)], [(7, 2), (6, 2), (4, 4)],
    [(6, 2), (4, 2), (1, 4)], [(2, 2), (5, 2), (5, 2), (4, 2)], [(3, 2), (0, 2), (3, 4)],
    [(1, 2), (4, 2), (6, 2), (4, 2)], [(7, 6), (None, 2)],
]


def melody_from_bars(bars, shift):
    notes = []
    slot = 0
    for bar in bars:
        assert sum(d for _, d in bar) == 8, bar
        for deg, dur in bar:
            if deg is not None:
                notes.append((slot, slot + dur, DEG[deg] + shift, 96))
            slot += dur
    return notes


def write_demo():
    demo_dir = ROOT / "data" / "demo"
    demo_dir.mkdir(parents=True, exist_ok=True)
    notes = melody_from_bars(PHRASE_A + PHRASE_A2 + PHRASE_B, -5)  # G major
    tpq = 480
    mel = header_events("Melody") + [(0, bytes([0xC0, 0]))]
    mel += note_events(notes, tick_of=lambda s: s * tpq // 2)
    (demo_dir / "demo_melody.mid").write_bytes(smf(1, tpq, [track_bytes(mel)]))
    (demo_dir / "demo_melody.ann").write_text("phrases: A8A8B8\nkey: G major\nmeter: 4/4\n")


# --- melody fixtures -------------------------------------------------------------

def random_melody(rng, bars, spb, scale_root, minor=False, allow_rests=True):
    scale = [0, 2, 3, 5, 7, 8, 10] if minor else MAJ_SCALE
    notes = []
    slot = 0
    total = bars * spb
    deg = 7
    while slot < total:
        dur = min(rng.choice([1, 1, 2, 2, 2, 3, 4]), total - slot)
        if allow_rests and rng.random() < 0.1:
            slot += dur
            continue
        deg = max(0, min(13, deg + rng.choice([-2, -1, -1, 0, 1, 1, 2])))
        pitch = 60 + scale_root + scale[deg % 7] + 12 * (deg // 7)
        notes.append((slot, slot + dur, pitch, rng.randint(70, 110)))
        slot += dur
    return notes


def write_fixtures():
    fx = ROOT / "tests" / "fixtures"
    fx.mkdir(parents=True, exist_ok=True)
    rng = random.Random(2024)

    def ann(name, phrases, key, meter="4/4"):
        (fx / f"{name}.ann").write_text(f"phrases: {phrases}\nkey: {key}\nmeter: {meter}\n")

    def grid(tpq):
        return lambda s: s * tpq // 2

    # 01: format 0, single track, tpq 480
    notes = random_melody(rng, 4, 8, 0)
    ev = header_events("Lead") + note_events(notes, tick_of=grid(480))
    (fx / "mel01_format0.mid").write_bytes(smf(0, 480, [track_bytes(ev)]))
    ann("mel01_format0", "A4", "C major")

    # 02: format 1, conductor track plus named melody track, tpq 96
    notes = random_melody(rng, 8, 8, 7)
    cond = header_events("Conductor")
    mel = [(0, meta(0x03, b"Melody"))] + note_events(notes, tick_of=grid(96))
    (fx / "mel02_conductor.mid").write_bytes(smf(1, 96, [track_bytes(cond), track_bytes(mel)]))
    ann("mel02_conductor", "A8", "G major")

    # 03: running status with velocity-0 note-offs, tpq 384
    notes = random_melody(rng, 8, 8, 2, minor=True)
    ev = header_events("Tune") + note_events(notes, vel0_off=True, tick_of=grid(384))
    (fx / "mel03_running_status.mid").write_bytes(smf(0, 384, [track_bytes(ev, running_status=True)]))
    ann("mel03_running_status", "A4B4", "D minor")

    # 04: off-grid timing jitter, tpq 480
    notes = random_melody(rng, 8, 8, 5)
    jitter = {}

    def jittered(s):
        jitter.setdefault(s, rng.randint(-50, 50))
        return max(0, s * 240 + jitter[s])

    ev = header_events("Melody") + note_events(notes, tick_of=jittered)
    (fx / "mel04_offgrid.mid").write_bytes(smf(0, 480, [track_bytes(ev)]))
    ann("mel04_offgrid", "A4A4", "F major")

    # 05: overlapping legato notes, tpq 120
    notes = random_melody(rng, 4, 8, 9, minor=True, allow_rests=False)
    overl = [(on, off + (1 if i + 1 < len(notes) else 0), p, v) for i, (on, off, p, v) in enumerate(notes)]
    ev = header_events("Melody") + note_events(overl, tick_of=grid(120))
    (fx / "mel05_overlap.mid").write_bytes(smf(0, 120, [track_bytes(ev)]))
    ann("mel05_overlap", "A4", "A minor")

    # 06: unnamed tracks, melody found by highest mean pitch, tpq 960
    notes = random_melody(rng, 8, 8, 0)
    bass = [(s, s + 8, 36 + rng.choice([0, 5, 7, 9]), 80) for s in range(0, 64, 8)]
    t1 = note_events(bass, channel=1, tick_of=grid(960))
    t2 = note_events(notes, tick_of=grid(960))
    (fx / "mel06_multitrack.mid").write_bytes(smf(1, 960, [track_bytes(t1), track_bytes(t2)]))
    ann("mel06_multitrack", "A8", "C major")

    # 07: 2/4 meter, tpq 240
    notes = random_melody(rng, 8, 4, 10)
    ev = header_events("Melody", num=2, den=4) + note_events(notes, tick_of=grid(240))
    (fx / "mel07_two_four.mid").write_bytes(smf(0, 240, [track_bytes(ev)]))
    ann("mel07_two_four", "A4B4", "Bb major", meter="2/4")

    # 08: triplet quarter notes snapped onto the grid, tpq 480
    notes = []
    for beat in range(0, 16, 2):
        for k in range(3):
            on = beat * 480 + k * 320
            notes.append((on, on + 320, 64 + [0, 3, 7][k], 90))
    ev = header_events("Melody")
    raw = []
    for on, off, p, v in notes:
        raw.append((off, 0, bytes([0x80, p, 0])))
        raw.append((on, 1, bytes([0x90, p, v])))
    raw.sort(key=lambda e: (e[0], e[1]))
    ev += [(t, d) for t, _, d in raw]
    (fx / "mel08_triplets.mid").write_bytes(smf(0, 480, [track_bytes(ev)]))
    ann("mel08_triplets", "A4", "E minor")

    # 09: 23.5 bars for A8A8B8, padded with a final rest
    notes = [n for n in random_melody(rng, 24, 8, 7) if n[0] < 188]
    notes = [(on, min(off, 188), p, v) for on, off, p, v in notes]
    ev = header_events("Melody") + note_events(notes, tick_of=grid(480))
    (fx / "mel09_partial_bar.mid").write_bytes(smf(0, 480, [track_bytes(ev)]))
    ann("mel09_partial_bar", "A8A8B8", "G major")

    # 10: sysex, tempo change, unknown chunk, tpq 192
    notes = random_melody(rng, 4, 8, 4)
    ev = header_events("Melody") + [(0, bytes([0xF0, 3, 0x7E, 0x7F, 0xF7]))]
    ev += [(192 * 4, meta(0x51, (400000).to_bytes(3, "big")))]
    ev += note_events(notes, tick_of=grid(192))
    ev.sort(key=lambda e: e[0])
    junk = b"XFIH" + struct.pack(">I", 4) + b"\x00\x01\x02\x03"
    (fx / "mel10_sysex_chunk.mid").write_bytes(
        smf(1, 192, [track_bytes(header_events("Conductor")), track_bytes(ev)], extra_chunk=junk))
    ann("mel10_sysex_chunk", "A4", "E major")


def main():
    data = ROOT / "data"
    data.mkdir(exist_ok=True)
    lib = seed_library()
    with open(data / "seed_library.jsonl", "w") as f:
        for r in lib:
            f.write(json.dumps(r, separators=(",", ":")) + "\n")
    tex = textures()
    with open(data / "textures.jsonl", "w") as f:
        for r in tex:
            f.write(json.dumps(r, separators=(",", ":")) + "\n")
    (data / "micro_loss_table.json").write_text(json.dumps(micro_table(), indent=1) + "\n")
    (data / "style_map.txt").write_text(
        "# raw corpus label = style\n"
        "pop = pop_standard\npop_standard = pop_standard\nballad = pop_standard\n"
        "pop_complex = pop_complex\njazz-pop = pop_complex\ncity-pop = pop_complex\n"
        "dark = dark\nminor-ballad = dark\nrnb = rnb\nsoul = rnb\nneo-soul = rnb\n")
    write_demo()
    write_fixtures()
    print(f"{len(lib)} templates, {len(tex)} textures")


if __name__ == "__main__":
    main()
