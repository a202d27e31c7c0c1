//! Test-only oracles and fixtures. The oracles are written straight from the
//! per-pixel definitions and share no code with the library kernels.
#![allow(dead_code)]

use std::path::Path;

use calp::GrayImage;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_image(rng: &mut impl Rng, width: usize, height: usize) -> GrayImage {
    GrayImage::from_fn(width, height, |_, _| rng.random::<u8>())
}

/// An image whose pixels are pairwise distinct (needs width·height ≤ 256).
pub fn distinct_image(rng: &mut impl Rng, width: usize, height: usize) -> GrayImage {
    use rand::seq::SliceRandom;
    let mut values: Vec<u8> = (0..=255).collect();
    values.shuffle(rng);
    GrayImage::new(width, height, values[..width * height].to_vec()).unwrap()
}

fn c(e: u8, f: u8) -> u32 {
    if e <= f {
        0
    } else {
        1
    }
}

/// Naive horizontal and vertical CALP parts at 1-indexed `(i, j)`.
pub fn oracle_calp_parts(img: &GrayImage, i: usize, j: usize, d: usize) -> (u32, u32) {
    let px = |r: usize, c: usize| img.pixels()[(r - 1) * img.width() + (c - 1)];
    let h = 32 * c(px(i - d, j - d), px(i + d, j - d))
        + 16 * c(px(i - d, j), px(i + d, j))
        + 8 * c(px(i - d, j + d), px(i + d, j + d));
    let v = 4 * c(px(i - d, j - d), px(i - d, j + d))
        + 2 * c(px(i, j - d), px(i, j + d))
        + c(px(i + d, j - d), px(i + d, j + d));
    (h, v)
}

/// Naive code image over `i = 1+d..=M-d`, `j = 1+d..=N-d`.
pub fn oracle_calp_codes(img: &GrayImage, d: usize) -> Vec<u8> {
    let (m, n) = (img.height(), img.width());
    let mut out = Vec::new();
    for i in 1 + d..=m - d {
        for j in 1 + d..=n - d {
            let (h, v) = oracle_calp_parts(img, i, j, d);
            out.push((h + v) as u8);
        }
    }
    out
}

/// 8-neighborhood of 1-indexed `(i, j)`, clockwise from the top-left.
fn ring8(img: &GrayImage, i: usize, j: usize) -> [i32; 8] {
    let px = |r: usize, c: usize| img.pixels()[(r - 1) * img.width() + (c - 1)] as i32;
    [
        px(i - 1, j - 1),
        px(i - 1, j),
        px(i - 1, j + 1),
        px(i, j + 1),
        px(i + 1, j + 1),
        px(i + 1, j),
        px(i + 1, j - 1),
        px(i, j - 1),
    ]
}

fn interior(img: &GrayImage, f: impl Fn(usize, usize) -> u8) -> Vec<u8> {
    let mut out = Vec::new();
    for i in 2..img.height() {
        for j in 2..img.width() {
            out.push(f(i, j));
        }
    }
    out
}

pub fn oracle_lbp(img: &GrayImage) -> Vec<u8> {
    interior(img, |i, j| {
        let center = img.pixels()[(i - 1) * img.width() + (j - 1)] as i32;
        let g = ring8(img, i, j);
        (0..8).map(|p| if g[p] - center >= 0 { 1u32 << p } else { 0 }).sum::<u32>() as u8
    })
}

pub fn oracle_cslbp(img: &GrayImage, t: i32) -> Vec<u8> {
    interior(img, |i, j| {
        let g = ring8(img, i, j);
        (0..4).map(|p| if g[p] - g[p + 4] - t >= 0 { 1u32 << p } else { 0 }).sum::<u32>() as u8
    })
}

pub fn oracle_csltp(img: &GrayImage, t: i32) -> Vec<u8> {
    let s = |d: i32| -> i32 {
        if d > t {
            1
        } else if d < -t {
            -1
        } else {
            0
        }
    };
    interior(img, |i, j| {
        let g = ring8(img, i, j);
        (3 * (s(g[0] - g[4]) + 1) + (s(g[2] - g[6]) + 1)) as u8
    })
}

/// Direct χ², written independently of the library.
pub fn oracle_chi2(x: &[f64], y: &[f64]) -> f64 {
    let mut s = 0.0;
    for k in 0..x.len() {
        if x[k] + y[k] != 0.0 {
            s += (x[k] - y[k]).powi(2) / (x[k] + y[k]);
        }
    }
    s / 2.0
}

/// Exhaustive leave-one-out ranking: other indices sorted by (distance, index).
pub fn oracle_ranking(features: &[Vec<f64>], q: usize) -> Vec<usize> {
    let mut others: Vec<(f64, usize)> = (0..features.len())
        .filter(|&i| i != q)
        .map(|i| (oracle_chi2(&features[q], &features[i]), i))
        .collect();
    others.sort_by(|a, b| a.partial_cmp(b).unwrap());
    others.into_iter().map(|(_, i)| i).collect()
}

/// Brute-force class-balanced ARP and ARR at cutoff `lambda`.
pub fn oracle_arp_arr(features: &[Vec<f64>], class: &[usize], lambda: usize) -> (f64, f64) {
    let n_classes = class.iter().max().unwrap() + 1;
    let mut p_sum = vec![0.0; n_classes];
    let mut r_sum = vec![0.0; n_classes];
    let mut count = vec![0usize; n_classes];
    for c in class {
        count[*c] += 1;
    }
    for q in 0..features.len() {
        let ranking = oracle_ranking(features, q);
        let hits = ranking[..lambda]
            .iter()
            .filter(|&&i| class[i] == class[q])
            .count() as f64;
        p_sum[class[q]] += hits / lambda as f64;
        r_sum[class[q]] += hits / count[class[q]] as f64;
    }
    let arp = (0..n_classes).map(|c| p_sum[c] / count[c] as f64).sum::<f64>() / n_classes as f64;
    let arr = (0..n_classes).map(|c| r_sum[c] / count[c] as f64).sum::<f64>() / n_classes as f64;
    (arp, arr)
}

/// Brute-force ANMRR with K = 2·NG and a 1.25·K penalty.
pub fn oracle_anmrr(features: &[Vec<f64>], class: &[usize]) -> f64 {
    let mut total = 0.0;
    for q in 0..features.len() {
        let ranking = oracle_ranking(features, q);
        let ranks: Vec<f64> = ranking
            .iter()
            .enumerate()
            .filter(|(_, &i)| class[i] == class[q])
            .map(|(p, _)| (p + 1) as f64)
            .collect();
        let ng = ranks.len() as f64;
        let k = 2.0 * ng;
        let avr: f64 = ranks.iter().map(|&r| if r > k { 1.25 * k } else { r }).sum::<f64>() / ng;
        total += (avr - 0.5 - ng / 2.0) / (1.25 * k - 0.5 - ng / 2.0);
    }
    total / features.len() as f64
}

/// Brute-force first-match rank of each probe against a gallery.
pub fn oracle_first_match(features: &[Vec<f64>], class: &[usize], probe: usize, gallery: &[usize]) -> usize {
    let mut g: Vec<(f64, usize)> = gallery
        .iter()
        .filter(|&&i| i != probe)
        .map(|&i| (oracle_chi2(&features[probe], &features[i]), i))
        .collect();
    g.sort_by(|a, b| a.partial_cmp(b).unwrap());
    g.iter().position(|&(_, i)| class[i] == class[probe]).unwrap() + 1
}

pub fn write_png(path: &Path, img: &GrayImage) {
    std::fs::create_dir_all(path.parent().unwrap()).unwrap();
    img.save(path).unwrap();
}

/// Writes a corpus of `classes` classes, each holding `per_class` copies of
/// one random 24x24 image.
pub fn write_duplicate_corpus(root: &Path, classes: usize, per_class: usize, seed: u64) {
    let mut r = rng(seed);
    for c in 0..classes {
        let img = random_image(&mut r, 24, 24);
        for k in 0..per_class {
            write_png(&root.join(format!("class{c:02}")).join(format!("{k:02}.png")), &img);
        }
    }
}

/// Writes a corpus of noisy class prototypes with unequal class sizes.
pub fn write_noisy_corpus(root: &Path, sizes: &[usize], seed: u64) {
    let mut r = rng(seed);
    for (c, &n) in sizes.iter().enumerate() {
        let base = random_image(&mut r, 20, 20);
        for k in 0..n {
            let noisy = GrayImage::from_fn(20, 20, |row, col| {
                base.get(row, col).saturating_add(r.random_range(0..40))
            });
            write_png(&root.join(format!("person_{c}")).join(format!("img{k}.png")), &noisy);
        }
    }
}
