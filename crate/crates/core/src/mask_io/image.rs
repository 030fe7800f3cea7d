use std::fs;
use std::io::Cursor;
use std::path::Path;

use image::{DynamicImage, ImageFormat};

use super::MaskIoError;

/// Row-major interleaved 8-bit raster with one (gray) or three (RGB) channels.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ImageBuffer {
    width: u32,
    height: u32,
    channels: u8,
    pixels: Vec<u8>,
}

impl std::fmt::Debug for ImageBuffer {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "ImageBuffer({}x{}x{}, {} bytes)",
            self.width,
            self.height,
            self.channels,
            self.pixels.len()
        )
    }
}

impl ImageBuffer {
    pub fn new(width: u32, height: u32, channels: u8, pixels: Vec<u8>) -> Result<Self, MaskIoError> {
        if width == 0 || height == 0 {
            return Err(MaskIoError::InvalidImage(format!(
                "dimensions must be positive, got {width}x{height}"
            )));
        }
        if channels != 1 && channels != 3 {
            return Err(MaskIoError::InvalidImage(format!(
                "channels must be 1 or 3, got {channels}"
            )));
        }
        let expected = width as usize * height as usize * channels as usize;
        if pixels.len() != expected {
            return Err(MaskIoError::InvalidImage(format!(
                "expected {expected} bytes, got {}",
                pixels.len()
            )));
        }
        Ok(ImageBuffer {
            width,
            height,
            channels,
            pixels,
        })
    }

    /// Constant-colour image; `color.len()` selects the channel count.
    pub fn filled(width: u32, height: u32, color: &[u8]) -> Result<Self, MaskIoError> {
        let n = width as usize * height as usize;
        let pixels = color.iter().copied().cycle().take(n * color.len()).collect();
        ImageBuffer::new(width, height, color.len() as u8, pixels)
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn channels(&self) -> u8 {
        self.channels
    }

    pub fn pixel_count(&self) -> usize {
        self.width as usize * self.height as usize
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn pixels_mut(&mut self) -> &mut [u8] {
        &mut self.pixels
    }

    pub fn into_pixels(self) -> Vec<u8> {
        self.pixels
    }

    /// Channel values of the pixel at row-major index `k`.
    #[inline]
    pub fn pixel(&self, k: usize) -> &[u8] {
        let c = self.channels as usize;
        &self.pixels[k * c..(k + 1) * c]
    }

    #[inline]
    pub fn pixel_mut(&mut self, k: usize) -> &mut [u8] {
        let c = self.channels as usize;
        &mut self.pixels[k * c..(k + 1) * c]
    }

    /// Three-channel copy; gray values are replicated.
    pub fn to_rgb(&self) -> ImageBuffer {
        if self.channels == 3 {
            return self.clone();
        }
        let pixels = self.pixels.iter().flat_map(|&v| [v, v, v]).collect();
        ImageBuffer {
            width: self.width,
            height: self.height,
            channels: 3,
            pixels,
        }
    }

    /// PNG encoding of the buffer.
    pub fn encode_png(&self) -> Result<Vec<u8>, MaskIoError> {
        let color = if self.channels == 1 {
            image::ExtendedColorType::L8
        } else {
            image::ExtendedColorType::Rgb8
        };
        let mut out = Cursor::new(Vec::new());
        image::write_buffer_with_format(
            &mut out,
            &self.pixels,
            self.width,
            self.height,
            color,
            ImageFormat::Png,
        )
        .map_err(|e| MaskIoError::Format(e.to_string()))?;
        Ok(out.into_inner())
    }

    /// Decodes an 8-bit gray or RGB PNG. Alpha channels are dropped.
    pub fn decode_png(bytes: &[u8]) -> Result<ImageBuffer, MaskIoError> {
        let decoded = image::load_from_memory_with_format(bytes, ImageFormat::Png)
            .map_err(|e| match e {
                image::ImageError::IoError(io) => MaskIoError::Io {
                    path: Default::default(),
                    source: io,
                },
                image::ImageError::Unsupported(u) => MaskIoError::Format(u.to_string()),
                other => MaskIoError::Io {
                    path: Default::default(),
                    source: std::io::Error::new(std::io::ErrorKind::InvalidData, other.to_string()),
                },
            })?;
        let (width, height) = (decoded.width(), decoded.height());
        let (channels, pixels) = match decoded {
            DynamicImage::ImageLuma8(b) => (1, b.into_raw()),
            DynamicImage::ImageLumaA8(_) => (1, decoded.to_luma8().into_raw()),
            DynamicImage::ImageRgb8(b) => (3, b.into_raw()),
            DynamicImage::ImageRgba8(_) => (3, decoded.to_rgb8().into_raw()),
            other => {
                return Err(MaskIoError::Format(format!(
                    "only 8-bit gray or RGB PNG is supported, got {:?}",
                    other.color()
                )))
            }
        };
        ImageBuffer::new(width, height, channels, pixels)
    }
}

/// Loads a PNG from disk.
pub fn load_image(path: impl AsRef<Path>) -> Result<ImageBuffer, MaskIoError> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| MaskIoError::io(path, e))?;
    ImageBuffer::decode_png(&bytes).map_err(|e| match e {
        MaskIoError::Io { source, .. } => MaskIoError::io(path, source),
        other => other,
    })
}

pub fn save_png(image: &ImageBuffer, path: impl AsRef<Path>) -> Result<(), MaskIoError> {
    let path = path.as_ref();
    let bytes = image.encode_png()?;
    fs::write(path, bytes).map_err(|e| MaskIoError::io(path, e))
}
