//! Square-window median filter for grayscale images.
//!
//! Output pixel `(x, y)` is the lower median of the input pixels in
//! `[x-r, x+r] x [y-r, y+r]` intersected with the image. Windows near the
//! border are therefore smaller, and may hold an even number of pixels.
//!
//! [`filter`] cuts the output into tiles of `3r x 3r` pixels. Each tile keeps
//! a [`DynamicTree`] over a strip of `2r+1` input rows stored column by
//! column, so the window of any output pixel in the current row is one
//! contiguous run of the list. Moving down one row deletes the top pixel of
//! every column and appends the new bottom pixel.

use std::collections::VecDeque;

use crate::dynamic::{DynamicTree, ElementHandle};
use crate::error::{Error, Result};
use crate::par::{self, Parallelism};
use crate::types::Stats;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    maxval: u16,
    pixels: Vec<u16>,
}

impl GrayImage {
    /// `pixels` are row-major. Every sample must be at most `maxval`.
    pub fn new(width: usize, height: usize, maxval: u16, pixels: Vec<u16>) -> Result<Self> {
        if width == 0 || height == 0 || width.checked_mul(height) != Some(pixels.len()) {
            return Err(Error::ImageShape {
                width,
                height,
                pixels: pixels.len(),
            });
        }
        if maxval == 0 {
            return Err(Error::Pgm("maxval must be positive".into()));
        }
        if let Some(i) = pixels.iter().position(|&p| p > maxval) {
            return Err(Error::Pgm(format!(
                "sample {} at pixel {i} exceeds maxval {maxval}",
                pixels[i]
            )));
        }
        Ok(GrayImage {
            width,
            height,
            maxval,
            pixels,
        })
    }

    pub fn filled(width: usize, height: usize, maxval: u16, value: u16) -> Result<Self> {
        Self::new(width, height, maxval, vec![value; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn maxval(&self) -> u16 {
        self.maxval
    }

    pub fn pixels(&self) -> &[u16] {
        &self.pixels
    }

    pub fn get(&self, x: usize, y: usize) -> u16 {
        self.pixels[y * self.width + x]
    }

    fn check_radius(&self, r: usize) -> Result<()> {
        if r == 0 {
            return Err(Error::ZeroRadius);
        }
        if 2 * r + 1 > self.width.min(self.height) {
            return Err(Error::RadiusTooLarge {
                radius: r,
                width: self.width,
                height: self.height,
            });
        }
        Ok(())
    }

    fn window(
        &self,
        x: usize,
        y: usize,
        r: usize,
    ) -> (std::ops::Range<usize>, std::ops::Range<usize>) {
        (
            x.saturating_sub(r)..(x + r + 1).min(self.width),
            y.saturating_sub(r)..(y + r + 1).min(self.height),
        )
    }
}

/// Reference filter: copies and sorts every window.
pub fn naive_filter(img: &GrayImage, r: usize) -> Result<GrayImage> {
    img.check_radius(r)?;
    let mut out = Vec::with_capacity(img.pixels.len());
    let mut window = Vec::with_capacity((2 * r + 1) * (2 * r + 1));
    for y in 0..img.height {
        for x in 0..img.width {
            let (xs, ys) = img.window(x, y, r);
            window.clear();
            for wy in ys {
                window.extend_from_slice(
                    &img.pixels[wy * img.width + xs.start..wy * img.width + xs.end],
                );
            }
            window.sort_unstable();
            out.push(window[window.len().div_ceil(2) - 1]);
        }
    }
    GrayImage::new(img.width, img.height, img.maxval, out)
}

#[derive(Clone, Copy, Debug)]
struct Tile {
    x0: usize,
    x1: usize,
    y0: usize,
    y1: usize,
}

fn tiles(img: &GrayImage, r: usize) -> Vec<Tile> {
    let side = 3 * r;
    let mut out = Vec::new();
    for y0 in (0..img.height).step_by(side) {
        for x0 in (0..img.width).step_by(side) {
            out.push(Tile {
                x0,
                x1: (x0 + side).min(img.width),
                y0,
                y1: (y0 + side).min(img.height),
            });
        }
    }
    out
}

/// Median filter backed by the dynamic range-selection structure. Returns
/// the filtered image and the operation counters summed over all tiles.
pub fn filter(img: &GrayImage, r: usize, par: Parallelism) -> Result<(GrayImage, Stats)> {
    img.check_radius(r)?;
    let tiles = tiles(img, r);
    run_tiles(img, r, par, tiles)
}

fn run_tiles(
    img: &GrayImage,
    r: usize,
    par: Parallelism,
    tiles: Vec<Tile>,
) -> Result<(GrayImage, Stats)> {
    let results = par::map_vec(par, tiles, |tile| {
        filter_tile(img, r, tile).map(|out| (tile, out))
    });
    let mut pixels = vec![0u16; img.pixels.len()];
    let mut stats = Stats::default();
    for result in results {
        let (tile, (values, tile_stats)) = result?;
        let tw = tile.x1 - tile.x0;
        for (row, chunk) in values.chunks_exact(tw).enumerate() {
            let start = (tile.y0 + row) * img.width + tile.x0;
            pixels[start..start + tw].copy_from_slice(chunk);
        }
        stats.merge(&tile_stats);
    }
    Ok((
        GrayImage::new(img.width, img.height, img.maxval, pixels)?,
        stats,
    ))
}

/// Filters one tile; returns its output pixels row-major.
fn filter_tile(img: &GrayImage, r: usize, tile: Tile) -> Result<(Vec<u16>, Stats)> {
    let cx0 = tile.x0.saturating_sub(r);
    let cx1 = (tile.x1 + r).min(img.width);
    let first_row = tile.y0.saturating_sub(r);
    let last_row = (tile.y0 + r + 1).min(img.height);

    let mut initial = Vec::with_capacity((cx1 - cx0) * (last_row - first_row));
    for x in cx0..cx1 {
        for y in first_row..last_row {
            initial.push(img.get(x, y));
        }
    }
    let (mut tree, handles) = DynamicTree::from_values(&initial)?;
    let rows = last_row - first_row;
    let mut columns: Vec<VecDeque<ElementHandle>> = handles
        .chunks_exact(rows)
        .map(|c| c.iter().copied().collect())
        .collect();

    let tw = tile.x1 - tile.x0;
    let mut out = Vec::with_capacity(tw * (tile.y1 - tile.y0));
    for y in tile.y0..tile.y1 {
        if y > tile.y0 {
            let incoming = y + r;
            let outgoing = y.checked_sub(r + 1);
            for (i, column) in columns.iter_mut().enumerate() {
                if incoming < img.height {
                    let back = *column.back().expect("strip columns are never empty");
                    column.push_back(tree.insert(Some(back), img.get(cx0 + i, incoming))?);
                }
                if outgoing.is_some() {
                    tree.delete(column.pop_front().expect("strip columns are never empty"))?;
                }
            }
        }
        for x in tile.x0..tile.x1 {
            let from = x.saturating_sub(r) - cx0;
            let to = (x + r).min(img.width - 1) - cx0;
            let lo = *columns[from]
                .front()
                .expect("strip columns are never empty");
            let hi = *columns[to].back().expect("strip columns are never empty");
            out.push(tree.query(lo, hi, None)?);
        }
    }
    Ok((out, tree.stats().clone()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_image(w: usize, h: usize, maxval: u16, seed: u64) -> GrayImage {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pixels = (0..w * h).map(|_| rng.gen_range(0..=maxval)).collect();
        GrayImage::new(w, h, maxval, pixels).unwrap()
    }

    #[test]
    fn shape_validation() {
        assert!(GrayImage::new(0, 3, 255, vec![]).is_err());
        assert!(GrayImage::new(2, 2, 255, vec![1, 2, 3]).is_err());
        assert!(GrayImage::new(2, 1, 10, vec![1, 11]).is_err());
        assert!(GrayImage::new(2, 1, 10, vec![1, 10]).is_ok());
    }

    #[test]
    fn radius_validation() {
        let img = GrayImage::filled(5, 7, 255, 3).unwrap();
        assert_eq!(naive_filter(&img, 0), Err(Error::ZeroRadius));
        assert!(matches!(
            filter(&img, 3, Parallelism::Sequential),
            Err(Error::RadiusTooLarge { radius: 3, .. })
        ));
        assert!(filter(&img, 2, Parallelism::Sequential).is_ok());
    }

    #[test]
    fn constant_image_is_fixed_point() {
        let img = GrayImage::filled(20, 13, 255, 77).unwrap();
        for r in 1..=6 {
            let (out, _) = filter(&img, r, Parallelism::Sequential).unwrap();
            assert_eq!(out, img);
            assert_eq!(naive_filter(&img, r).unwrap(), img);
        }
    }

    #[test]
    fn ramp_center_pixel() {
        let img = GrayImage::new(5, 5, 255, (1..=25).collect()).unwrap();
        let (out, _) = filter(&img, 1, Parallelism::Sequential).unwrap();
        assert_eq!(out.get(2, 2), 13);
        assert_eq!(naive_filter(&img, 1).unwrap().get(2, 2), 13);
        // corner window {1, 2, 6, 7}: lower median is 2
        assert_eq!(out.get(0, 0), 2);
    }

    #[test]
    fn matches_naive_on_random_images() {
        for (seed, (w, h)) in [(64, 64), (37, 51), (128, 20)].into_iter().enumerate() {
            let img = random_image(w, h, 255, seed as u64);
            for r in [1, 2, 3, 5, 7] {
                if 2 * r + 1 > w.min(h) {
                    continue;
                }
                let (fast, _) = filter(&img, r, Parallelism::default()).unwrap();
                assert_eq!(fast, naive_filter(&img, r).unwrap(), "{w}x{h} r={r}");
            }
        }
    }

    #[test]
    fn sixteen_bit_samples() {
        let img = random_image(30, 30, 65535, 9);
        let (fast, _) = filter(&img, 4, Parallelism::Sequential).unwrap();
        assert_eq!(fast, naive_filter(&img, 4).unwrap());
    }

    #[test]
    fn tile_order_does_not_matter() {
        let img = random_image(50, 41, 255, 3);
        let mut order = tiles(&img, 2);
        let (forward, _) = run_tiles(&img, 2, Parallelism::Sequential, order.clone()).unwrap();
        order.reverse();
        let (backward, _) = run_tiles(&img, 2, Parallelism::Sequential, order).unwrap();
        assert_eq!(forward, backward);
    }

    #[test]
    fn parallel_and_sequential_agree() {
        let img = random_image(70, 70, 255, 5);
        let (a, sa) = filter(&img, 3, Parallelism::Sequential).unwrap();
        let (b, sb) = filter(&img, 3, Parallelism::Parallel).unwrap();
        assert_eq!(a, b);
        assert_eq!(sa, sb);
    }
}
