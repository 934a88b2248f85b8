//! LSB-first bit packing shared by the level and sign payloads.

/// Appends fixed-width unsigned codes to a byte buffer, least significant bit first.
#[derive(Debug, Default)]
pub(crate) struct BitWriter {
    bytes: Vec<u8>,
    bit_len: usize,
}

impl BitWriter {
    pub(crate) fn with_capacity_bits(bits: usize) -> Self {
        Self {
            bytes: Vec::with_capacity(bits.div_ceil(8)),
            bit_len: 0,
        }
    }

    pub(crate) fn push(&mut self, code: u32, width: u32) {
        debug_assert!(width == 32 || code >> width == 0);
        for b in 0..width {
            if self.bit_len.is_multiple_of(8) {
                self.bytes.push(0);
            }
            if (code >> b) & 1 == 1 {
                let last = self.bytes.len() - 1;
                self.bytes[last] |= 1 << (self.bit_len % 8);
            }
            self.bit_len += 1;
        }
    }

    pub(crate) fn finish(self) -> Vec<u8> {
        self.bytes
    }
}

/// Reads back what [`BitWriter`] produced.
#[derive(Debug)]
pub(crate) struct BitReader<'a> {
    bytes: &'a [u8],
    bit_pos: usize,
}

impl<'a> BitReader<'a> {
    pub(crate) fn new(bytes: &'a [u8]) -> Self {
        Self { bytes, bit_pos: 0 }
    }

    /// Returns `None` once the buffer is exhausted.
    pub(crate) fn read(&mut self, width: u32) -> Option<u32> {
        if self.bit_pos + width as usize > self.bytes.len() * 8 {
            return None;
        }
        let mut code = 0u32;
        for b in 0..width {
            let byte = self.bytes[self.bit_pos / 8];
            if (byte >> (self.bit_pos % 8)) & 1 == 1 {
                code |= 1 << b;
            }
            self.bit_pos += 1;
        }
        Some(code)
    }

    /// Byte offset of the next unread bit.
    pub(crate) fn byte_pos(&self) -> usize {
        self.bit_pos / 8
    }
}
