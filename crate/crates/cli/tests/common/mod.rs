//! Toy scene fixtures and helpers for driving the `hseg` binary.
#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use hseg::mask_io::{Bitmap, ImageBuffer, Provenance, SegmentManifest, SegmentMask};

pub const TOY: u32 = 64;

pub fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_hseg")
}

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

pub fn golden() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

/// Subprocess endpoint for the region mock keyed on the toy region.
pub fn region_endpoint() -> String {
    format!("exec:{} mock-model --kind region --bbox 8,8,31,31", bin())
}

pub fn hseg(args: &[&str]) -> Output {
    Command::new(bin())
        .args(args)
        .env_remove("HSEG_ENDPOINT")
        .env_remove("RUST_LOG")
        .output()
        .expect("spawn hseg")
}

pub fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

pub fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn rect(id: u64, r0: u32, c0: u32, r1: u32, c1: u32) -> SegmentMask {
    let mut b = Bitmap::new(TOY, TOY);
    for r in r0..r1 {
        for c in c0..c1 {
            b.set((r * TOY + c) as usize);
        }
    }
    SegmentMask::from_bitmap(id, b).unwrap()
}

/// Dark textured background; the region rows 8..32, cols 8..32 holds a
/// 0/255 checkerboard in its upper half and 0/200 in its lower half.
pub fn toy_image() -> ImageBuffer {
    let mut img = ImageBuffer::filled(TOY, TOY, &[0, 0, 0]).unwrap();
    for r in 0..TOY {
        for c in 0..TOY {
            let on = (r + c) % 2 == 0;
            let v = match (r, c) {
                (8..20, 8..32) => if on { 255 } else { 0 },
                (20..32, 8..32) => if on { 200 } else { 0 },
                _ => ((r * 7 + c * 3) % 90) as u8,
            };
            img.pixel_mut((r * TOY + c) as usize).copy_from_slice(&[v, v, v]);
        }
    }
    img
}

/// Region 1, background blocks 2..=5, and with `children` the halves 10, 11.
pub fn toy_manifest(children: bool) -> SegmentManifest {
    let mut segs = vec![
        rect(1, 8, 8, 32, 32),
        rect(2, 0, 0, 8, 64),
        rect(3, 32, 0, 64, 64),
        rect(4, 8, 0, 32, 8),
        rect(5, 8, 32, 32, 64),
    ];
    if children {
        segs.push(rect(10, 8, 8, 20, 32));
        segs.push(rect(11, 20, 8, 32, 32));
    }
    SegmentManifest::new(TOY, TOY, segs, Provenance::default()).unwrap()
}
