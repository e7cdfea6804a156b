use std::fmt::Write;

use ballcover::{Covering, Error, Result, Vector};

pub const PIXELS: usize = 512;
/// Half-width of the plotted square `[−EXTENT, EXTENT]²`.
pub const EXTENT: f64 = 1.1;

fn pixel_center(i: usize) -> f64 {
    -EXTENT + (i as f64 + 0.5) * 2.0 * EXTENT / PIXELS as f64
}

/// Rasterizes each set of a planar covering by membership on a
/// `PIXELS × PIXELS` grid and emits one `<g>` per set holding the row runs
/// as a single path, plus the unit circle of the space's norm as an outline
/// and a marker at the centre.
pub fn render(cov: &Covering, tol: f64) -> Result<String> {
    if cov.space.dim != 2 {
        return Err(Error::InvalidParameter(format!("plot needs a planar covering, got dimension {}", cov.space.dim)));
    }
    let to_px = |x: f64| (x + EXTENT) * PIXELS as f64 / (2.0 * EXTENT);
    let mut svg = String::new();
    writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{PIXELS}" height="{PIXELS}" viewBox="0 0 {PIXELS} {PIXELS}">"#
    )
    .unwrap();
    writeln!(svg, r#"<rect width="{PIXELS}" height="{PIXELS}" fill="white"/>"#).unwrap();
    let n = cov.sets.len();
    for (idx, set) in cov.sets.iter().enumerate() {
        let hue = (idx as f64 * 360.0 / n as f64).round();
        let mut path = String::new();
        for row in 0..PIXELS {
            let y = -pixel_center(row);
            let mut start: Option<usize> = None;
            for col in 0..=PIXELS {
                let inside = col < PIXELS && {
                    let p = Vector::new(vec![pixel_center(col), y])?;
                    set.contains(&cov.space, &p, tol)?
                };
                match (inside, start) {
                    (true, None) => start = Some(col),
                    (false, Some(s)) => {
                        write!(path, "M{s} {row}h{}v1h-{}z", col - s, col - s).unwrap();
                        start = None;
                    }
                    _ => {}
                }
            }
        }
        writeln!(
            svg,
            r#"<g class="set" data-label="{}" fill="hsl({hue},70%,50%)" fill-opacity="0.35"><path d="{path}"/></g>"#,
            cov.label(idx)
        )
        .unwrap();
    }

    let mut outline = String::new();
    for k in 0..=360 {
        let t = (k as f64).to_radians();
        let u = Vector::new(vec![t.cos(), t.sin()])?;
        let u = u.scale(1.0 / cov.space.norm(&u)?);
        let cmd = if k == 0 { 'M' } else { 'L' };
        write!(outline, "{cmd}{:.2} {:.2}", to_px(u[0]), to_px(-u[1])).unwrap();
    }
    writeln!(svg, r#"<path class="ball" d="{outline}z" fill="none" stroke="black" stroke-width="1"/>"#).unwrap();
    let c = to_px(0.0);
    writeln!(svg, r#"<circle class="center" cx="{c}" cy="{c}" r="3" fill="black"/>"#).unwrap();
    svg.push_str("</svg>\n");
    Ok(svg)
}
