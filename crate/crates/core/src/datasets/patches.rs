use super::pgm::GrayImage;
use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::solver::EigenBasis;

/// Layout of the sliding-window patches cut from an image: one patch per top-left
/// position, in row-major order.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PatchGrid {
    pub height: usize,
    pub width: usize,
    pub side: usize,
}

impl PatchGrid {
    /// Patch positions per column (`H − s + 1`).
    pub fn out_height(&self) -> usize {
        self.height - self.side + 1
    }

    /// Patch positions per row (`W − s + 1`).
    pub fn out_width(&self) -> usize {
        self.width - self.side + 1
    }

    pub fn rows(&self) -> usize {
        self.out_height() * self.out_width()
    }

    fn center_offset(&self) -> usize {
        self.side / 2
    }

    /// Row index of the patch centered on pixel `(center_y, center_x)`.
    pub fn patch_index_of(&self, center_y: usize, center_x: usize) -> Result<usize> {
        let off = self.center_offset();
        let inside = |c: usize, out: usize| c >= off && c - off < out;
        if !inside(center_y, self.out_height()) || !inside(center_x, self.out_width()) {
            return Err(Error::InvalidParameter(format!(
                "pixel ({center_y}, {center_x}) is not the center of a full {s}x{s} patch in a {h}x{w} image",
                s = self.side,
                h = self.height,
                w = self.width
            )));
        }
        Ok((center_y - off) * self.out_width() + (center_x - off))
    }

    /// Top-left pixel of patch `row`.
    pub fn top_left(&self, row: usize) -> (usize, usize) {
        (row / self.out_width(), row % self.out_width())
    }

    /// Center pixel of patch `row`.
    pub fn center(&self, row: usize) -> (usize, usize) {
        let (y, x) = self.top_left(row);
        (y + self.center_offset(), x + self.center_offset())
    }
}

/// One row per `s×s` window (pixels row-major, raw values in `[0, 255]`).
pub fn extract_patches(img: &GrayImage, side: usize) -> Result<(DenseMatrix, PatchGrid)> {
    if side == 0 || img.height() < side || img.width() < side {
        return Err(Error::InvalidParameter(format!(
            "{}x{} image is smaller than a {side}x{side} patch",
            img.height(),
            img.width()
        )));
    }
    let grid = PatchGrid {
        height: img.height(),
        width: img.width(),
        side,
    };
    let mut data = Vec::with_capacity(grid.rows() * side * side);
    for y in 0..grid.out_height() {
        for x in 0..grid.out_width() {
            for dy in 0..side {
                for dx in 0..side {
                    data.push(f64::from(img.get(y + dy, x + dx)));
                }
            }
        }
    }
    Ok((
        DenseMatrix::from_row_major(grid.rows(), side * side, data)?,
        grid,
    ))
}

/// Maps scores affinely onto `0..=255` (rounded half-up) laid out on the patch grid.
/// With `invert`, the highest score is black. Constant scores give a uniform 128.
pub fn scores_to_heatmap(scores: &[f64], grid: &PatchGrid, invert: bool) -> Result<GrayImage> {
    if scores.len() != grid.rows() {
        return Err(Error::Dimension(format!(
            "{} scores for a grid of {} patches",
            scores.len(),
            grid.rows()
        )));
    }
    let (lo, hi) = scores
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &s| {
            (a.min(s), b.max(s))
        });
    let pixels = scores
        .iter()
        .map(|&s| {
            if hi == lo {
                return 128;
            }
            let level = ((s - lo) / (hi - lo) * 255.0 + 0.5)
                .floor()
                .clamp(0.0, 255.0) as u8;
            if invert {
                255 - level
            } else {
                level
            }
        })
        .collect();
    GrayImage::new(grid.out_height(), grid.out_width(), pixels)
}

/// Heatmap of `|U(·, column)|`.
pub fn eigvec_to_map(
    basis: &EigenBasis,
    column: usize,
    grid: &PatchGrid,
    invert: bool,
) -> Result<GrayImage> {
    if column >= basis.len() {
        return Err(Error::IndexOutOfRange {
            index: column,
            len: basis.len(),
        });
    }
    let magnitudes: Vec<f64> = basis
        .vectors
        .column(column)
        .iter()
        .map(|v| v.abs())
        .collect();
    scores_to_heatmap(&magnitudes, grid, invert)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp(h: usize, w: usize) -> GrayImage {
        GrayImage::new(h, w, (0..h * w).map(|v| (v * 7 % 256) as u8).collect()).unwrap()
    }

    #[test]
    fn four_by_four_gives_four_patches() {
        let img = ramp(4, 4);
        let (x, grid) = extract_patches(&img, 3).unwrap();
        assert_eq!((x.rows(), x.cols()), (4, 9));
        let expected: Vec<f64> = (0..3)
            .flat_map(|y| (0..3).map(move |x| (y, x)))
            .map(|(y, x)| f64::from(img.get(y, x)))
            .collect();
        assert_eq!(x.row(0), expected.as_slice());
        assert_eq!(grid.top_left(3), (1, 1));
    }

    #[test]
    fn three_by_three_is_one_flattened_row() {
        let img = ramp(3, 3);
        let (x, _) = extract_patches(&img, 3).unwrap();
        let flat: Vec<f64> = img.pixels().iter().map(|&p| f64::from(p)).collect();
        assert_eq!(x.rows(), 1);
        assert_eq!(x.row(0), flat.as_slice());
    }

    #[test]
    fn too_small_image_is_rejected() {
        assert!(extract_patches(&ramp(2, 5), 3).is_err());
    }

    #[test]
    fn center_indexing() {
        let grid = PatchGrid {
            height: 256,
            width: 256,
            side: 3,
        };
        assert_eq!(grid.rows(), 64516);
        assert_eq!(grid.patch_index_of(1, 1).unwrap(), 0);
        assert_eq!(grid.patch_index_of(166, 96).unwrap(), 165 * 254 + 95);
        assert_eq!(grid.patch_index_of(166, 96).unwrap(), 42005);
        assert_eq!(grid.patch_index_of(254, 254).unwrap(), 253 * 254 + 253);
        assert_eq!(grid.center(42005), (166, 96));
        for (y, x) in [(0, 5), (5, 0), (255, 5), (5, 255)] {
            assert!(grid.patch_index_of(y, x).is_err());
        }
    }

    #[test]
    fn heatmap_endpoints_and_constant() {
        let grid = PatchGrid {
            height: 3,
            width: 4,
            side: 3,
        };
        assert_eq!(
            scores_to_heatmap(&[0.0, 1.0], &grid, true)
                .unwrap()
                .pixels(),
            &[255, 0]
        );
        assert_eq!(
            scores_to_heatmap(&[0.0, 1.0], &grid, false)
                .unwrap()
                .pixels(),
            &[0, 255]
        );
        assert_eq!(
            scores_to_heatmap(&[0.3, 0.3], &grid, true)
                .unwrap()
                .pixels(),
            &[128, 128]
        );
        assert!(scores_to_heatmap(&[0.3], &grid, true).is_err());
    }

    #[test]
    fn eigvec_map_matches_magnitude_heatmap() {
        let grid = PatchGrid {
            height: 3,
            width: 5,
            side: 3,
        };
        let basis = EigenBasis {
            values: vec![1.0, 0.5],
            vectors: DenseMatrix::from_rows(&[[0.5, -0.2], [-0.5, 0.9], [0.5, 0.1]]).unwrap(),
            residual: 0.0,
        };
        assert_eq!(
            eigvec_to_map(&basis, 0, &grid, false).unwrap().pixels(),
            &[128; 3]
        );
        let direct = scores_to_heatmap(&[0.2, 0.9, 0.1], &grid, false).unwrap();
        assert_eq!(eigvec_to_map(&basis, 1, &grid, false).unwrap(), direct);
        assert!(eigvec_to_map(&basis, 2, &grid, false).is_err());
    }
}
