use seco_core::backend::{open_backend, FileBackend, ImageRef, SegmenterBackend};
use seco_core::io::{BBox, BitMask, MaskEntry, MaskSet, MaskSource, Point};
use seco_core::Error;

fn mask_set(id: &str, w: u32, h: u32, boxes: &[BBox]) -> MaskSet {
    MaskSet {
        image_id: id.into(),
        width: w,
        height: h,
        masks: boxes
            .iter()
            .enumerate()
            .map(|(i, b)| MaskEntry {
                id: i as u32 * 10,
                rle: BitMask::from_box(w, h, b).encode(),
                source: MaskSource::Auto,
            })
            .collect(),
    }
}

fn image(id: &str, w: u32, h: u32) -> ImageRef {
    ImageRef { id: id.into(), path: format!("{id}.png").into(), width: w, height: h }
}

#[test]
fn stored_set_is_returned_verbatim() {
    let dir = tempfile::tempdir().unwrap();
    let set = mask_set("a", 16, 12, &[BBox::new(0, 0, 3, 3), BBox::new(5, 5, 9, 9)]);
    set.save(dir.path().join("a.json")).unwrap();
    let backend = open_backend(&format!("file:{}", dir.path().display())).unwrap();
    assert!(backend.supports_auto() && backend.supports_prompt());
    assert_eq!(backend.auto_masks(&image("a", 16, 12)).unwrap(), set);
    // cached answer is identical too
    assert_eq!(backend.auto_masks(&image("a", 16, 12)).unwrap(), set);
}

#[test]
fn prompts_resolve_against_the_pool() {
    let dir = tempfile::tempdir().unwrap();
    let inner = BBox::new(4, 4, 7, 7);
    let set = mask_set("a", 16, 16, &[BBox::new(0, 0, 15, 15), inner, BBox::new(12, 0, 15, 2)]);
    set.save(dir.path().join("a.json")).unwrap();
    let backend = FileBackend::new(dir.path());
    let rle = backend.prompt_segment(&image("a", 16, 16), BBox::new(3, 3, 8, 8), Point::new(5, 5)).unwrap();
    assert_eq!(rle, BitMask::from_box(16, 16, &inner).encode());
}

#[test]
fn dims_mismatch_and_missing_files() {
    let dir = tempfile::tempdir().unwrap();
    mask_set("a", 16, 12, &[BBox::new(0, 0, 3, 3)]).save(dir.path().join("a.json")).unwrap();
    let backend = FileBackend::new(dir.path());
    assert!(matches!(backend.auto_masks(&image("a", 12, 16)), Err(Error::DimMismatch { .. })));
    assert!(matches!(backend.auto_masks(&image("b", 16, 12)), Err(Error::ImageNotFound(_))));
    let gone = FileBackend::new(dir.path().join("nope"));
    assert!(matches!(gone.auto_masks(&image("a", 16, 12)), Err(Error::BackendUnavailable(_))));
}

#[test]
fn empty_pool_and_empty_mask() {
    let dir = tempfile::tempdir().unwrap();
    mask_set("none", 8, 8, &[]).save(dir.path().join("none.json")).unwrap();
    let mut zero = mask_set("zero", 8, 8, &[]);
    zero.masks.push(MaskEntry { id: 0, rle: BitMask::new(8, 8).encode(), source: MaskSource::Auto });
    zero.save(dir.path().join("zero.json")).unwrap();
    let backend = FileBackend::new(dir.path());
    let prompt = |id: &str| backend.prompt_segment(&image(id, 8, 8), BBox::new(0, 0, 3, 3), Point::new(1, 1));
    assert!(matches!(prompt("none"), Err(Error::EmptyPool)));
    assert!(matches!(prompt("zero"), Err(Error::EmptyResult)));
}

#[test]
fn unknown_backend_scheme() {
    assert!(matches!(open_backend("ftp://x"), Err(Error::Config(_))));
}
