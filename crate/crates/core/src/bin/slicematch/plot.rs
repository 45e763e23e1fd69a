use image::{Rgb, RgbImage};

const WIDTH: u32 = 640;
const HEIGHT: u32 = 400;
const MARGIN: u32 = 40;

/// Line plot of `log10(values[k])` against k with a tick per decade.
pub fn decay_plot(values: &[f64]) -> RgbImage {
    let mut img = RgbImage::from_pixel(WIDTH, HEIGHT, Rgb([255, 255, 255]));
    let black = Rgb([0, 0, 0]);
    let grey = Rgb([210, 210, 210]);
    let blue = Rgb([30, 80, 200]);

    let logs: Vec<Option<f64>> = values
        .iter()
        .map(|v| (*v > 0.0 && v.is_finite()).then(|| v.log10()))
        .collect();
    let finite: Vec<f64> = logs.iter().flatten().copied().collect();
    let (lo, hi) = if finite.is_empty() {
        (-1.0, 0.0)
    } else {
        let lo = finite.iter().cloned().fold(f64::INFINITY, f64::min).floor();
        let hi = finite.iter().cloned().fold(f64::NEG_INFINITY, f64::max).ceil();
        if hi > lo { (lo, hi) } else { (lo - 1.0, hi + 1.0) }
    };

    let (x0, x1) = (MARGIN as f64, (WIDTH - MARGIN) as f64);
    let (y0, y1) = ((HEIGHT - MARGIN) as f64, MARGIN as f64);
    let span = (values.len().max(2) - 1) as f64;
    let px = |k: usize| x0 + (x1 - x0) * k as f64 / span;
    let py = |v: f64| y0 + (y1 - y0) * (v - lo) / (hi - lo);

    let mut decade = lo;
    while decade <= hi {
        line(&mut img, x0, py(decade), x1, py(decade), grey);
        decade += 1.0;
    }
    line(&mut img, x0, y0, x1, y0, black);
    line(&mut img, x0, y0, x0, y1, black);

    let mut prev: Option<(f64, f64)> = None;
    for (k, v) in logs.iter().enumerate() {
        match v {
            Some(v) => {
                let p = (px(k), py(*v));
                if let Some(q) = prev {
                    line(&mut img, q.0, q.1, p.0, p.1, blue);
                }
                dot(&mut img, p.0, p.1, blue);
                prev = Some(p);
            }
            None => prev = None,
        }
    }
    img
}

fn put(img: &mut RgbImage, x: i64, y: i64, c: Rgb<u8>) {
    if x >= 0 && y >= 0 && (x as u32) < img.width() && (y as u32) < img.height() {
        img.put_pixel(x as u32, y as u32, c);
    }
}

fn dot(img: &mut RgbImage, x: f64, y: f64, c: Rgb<u8>) {
    let (cx, cy) = (x.round() as i64, y.round() as i64);
    for dx in -2..=2 {
        for dy in -2..=2 {
            put(img, cx + dx, cy + dy, c);
        }
    }
}

fn line(img: &mut RgbImage, xa: f64, ya: f64, xb: f64, yb: f64, c: Rgb<u8>) {
    let steps = (xb - xa).abs().max((yb - ya).abs()).ceil().max(1.0) as usize;
    for s in 0..=steps {
        let t = s as f64 / steps as f64;
        put(img, (xa + t * (xb - xa)).round() as i64, (ya + t * (yb - ya)).round() as i64, c);
    }
}
