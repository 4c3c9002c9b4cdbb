"""8x8 glyph bitmaps for printable ASCII 33..126.

Rasterized once from DejaVu Sans Mono Bold (Bitstream Vera license) by box
downsampling to 7x8 plus one blank spacing column. Each glyph is eight row
bytes, most significant bit leftmost.
"""

GLYPHS = {
    '!': (0x00, 0x30, 0x30, 0x30, 0x00, 0x30, 0x00, 0x00),
    '"': (0x00, 0x6C, 0x6C, 0x00, 0x00, 0x00, 0x00, 0x00),
    '#': (0x00, 0x34, 0xFE, 0x68, 0xFC, 0x58, 0x00, 0x00),
    '$': (0x10, 0x78, 0x70, 0x7C, 0x1C, 0x7C, 0x10, 0x00),
    '%': (0x00, 0xF0, 0xF0, 0x78, 0x1E, 0x1E, 0x00, 0x00),
    '&': (0x38, 0x78, 0x60, 0xFE, 0xDE, 0xFE, 0x00, 0x00),
    "'": (0x00, 0x30, 0x30, 0x00, 0x00, 0x00, 0x00, 0x00),
    '(': (0x08, 0x18, 0x30, 0x30, 0x30, 0x30, 0x18, 0x00),
    ')': (0x20, 0x30, 0x18, 0x18, 0x18, 0x18, 0x30, 0x00),
    '*': (0x10, 0x7C, 0x7C, 0x10, 0x00, 0x00, 0x00, 0x00),
    '+': (0x00, 0x00, 0x30, 0xFE, 0x30, 0x10, 0x00, 0x00),
    ',': (0x00, 0x00, 0x00, 0x00, 0x00, 0x38, 0x30, 0x00),
    '-': (0x00, 0x00, 0x00, 0x38, 0x38, 0x00, 0x00, 0x00),
    '.': (0x00, 0x00, 0x00, 0x00, 0x00, 0x38, 0x00, 0x00),
    '/': (0x00, 0x0C, 0x18, 0x10, 0x30, 0x60, 0x40, 0x00),
    '0': (0x30, 0x7C, 0xEC, 0xFC, 0x6C, 0x7C, 0x00, 0x00),
    '1': (0x00, 0x78, 0x18, 0x18, 0x18, 0x7C, 0x00, 0x00),
    '2': (0x30, 0x7C, 0x0C, 0x18, 0x70, 0xFC, 0x00, 0x00),
    '3': (0x70, 0x7C, 0x0C, 0x3C, 0x0C, 0xFC, 0x00, 0x00),
    '4': (0x00, 0x1C, 0x3C, 0x6C, 0xFE, 0x0C, 0x00, 0x00),
    '5': (0x00, 0x7C, 0x70, 0x7C, 0x0C, 0xFC, 0x00, 0x00),
    '6': (0x18, 0x7C, 0x78, 0xFC, 0x6C, 0x7C, 0x00, 0x00),
    '7': (0x00, 0x7C, 0x1C, 0x18, 0x30, 0x30, 0x00, 0x00),
    '8': (0x30, 0x7C, 0x6C, 0x7C, 0xCC, 0x7C, 0x00, 0x00),
    '9': (0x30, 0x7C, 0xCC, 0x7C, 0x0C, 0x78, 0x00, 0x00),
    ':': (0x00, 0x00, 0x30, 0x30, 0x00, 0x38, 0x00, 0x00),
    ';': (0x00, 0x00, 0x30, 0x30, 0x00, 0x38, 0x30, 0x00),
    '<': (0x00, 0x00, 0x1E, 0xF0, 0x7C, 0x0C, 0x00, 0x00),
    '=': (0x00, 0x00, 0x7C, 0xFC, 0xFC, 0x00, 0x00, 0x00),
    '>': (0x00, 0x00, 0xF0, 0x1C, 0x7C, 0xC0, 0x00, 0x00),
    '?': (0x38, 0x7C, 0x1C, 0x30, 0x30, 0x30, 0x00, 0x00),
    '@': (0x00, 0x7C, 0xC6, 0xBE, 0xB6, 0xDC, 0x7C, 0x00),
    'A': (0x00, 0x38, 0x78, 0x6C, 0x7C, 0xCE, 0x00, 0x00),
    'B': (0x00, 0xFC, 0xEC, 0xFC, 0xCE, 0xFC, 0x00, 0x00),
    'C': (0x1C, 0x7C, 0x60, 0x60, 0x60, 0x3C, 0x00, 0x00),
    'D': (0x00, 0xFC, 0xEC, 0xEE, 0xEC, 0xFC, 0x00, 0x00),
    'E': (0x00, 0x7C, 0x60, 0x7C, 0x60, 0x7C, 0x00, 0x00),
    'F': (0x00, 0x7C, 0x60, 0x7C, 0x60, 0x60, 0x00, 0x00),
    'G': (0x18, 0x7C, 0xE0, 0xEC, 0x64, 0x7C, 0x00, 0x00),
    'H': (0x00, 0xEC, 0xEC, 0xFC, 0xEC, 0xEC, 0x00, 0x00),
    'I': (0x00, 0x7C, 0x30, 0x30, 0x30, 0x7C, 0x00, 0x00),
    'J': (0x00, 0x3C, 0x0C, 0x0C, 0x0C, 0xF8, 0x00, 0x00),
    'K': (0x00, 0xCC, 0xF8, 0xF8, 0xFC, 0xCC, 0x00, 0x00),
    'L': (0x00, 0x60, 0x60, 0x60, 0x60, 0x7E, 0x00, 0x00),
    'M': (0x00, 0xEE, 0xFE, 0xFE, 0xC6, 0xC6, 0x00, 0x00),
    'N': (0x00, 0xEC, 0xFC, 0xFC, 0xDC, 0xCC, 0x00, 0x00),
    'O': (0x30, 0x7C, 0xEC, 0xCE, 0xEC, 0x7C, 0x00, 0x00),
    'P': (0x00, 0x7C, 0x6E, 0x7C, 0x60, 0x60, 0x00, 0x00),
    'Q': (0x30, 0x7C, 0xEC, 0xCE, 0xEC, 0x7C, 0x1C, 0x00),
    'R': (0x00, 0xFC, 0xEC, 0xFC, 0xFC, 0xEE, 0x00, 0x00),
    'S': (0x38, 0x7C, 0xE0, 0x3C, 0x0C, 0xFC, 0x00, 0x00),
    'T': (0x00, 0xFC, 0x30, 0x30, 0x30, 0x30, 0x00, 0x00),
    'U': (0x00, 0xCC, 0xCC, 0xCC, 0xEC, 0x7C, 0x00, 0x00),
    'V': (0x00, 0xCC, 0x6C, 0x6C, 0x78, 0x38, 0x00, 0x00),
    'W': (0x00, 0xC6, 0xF6, 0xFE, 0xEC, 0x6C, 0x00, 0x00),
    'X': (0x00, 0x6C, 0x38, 0x38, 0x78, 0xEC, 0x00, 0x00),
    'Y': (0x00, 0xEC, 0x7C, 0x38, 0x30, 0x30, 0x00, 0x00),
    'Z': (0x00, 0x7E, 0x1C, 0x38, 0x60, 0xFE, 0x00, 0x00),
    '[': (0x18, 0x38, 0x30, 0x30, 0x30, 0x30, 0x38, 0x00),
    '\\': (0x00, 0x60, 0x20, 0x30, 0x18, 0x08, 0x0C, 0x00),
    ']': (0x30, 0x38, 0x18, 0x18, 0x18, 0x18, 0x38, 0x00),
    '^': (0x00, 0x78, 0x4C, 0x00, 0x00, 0x00, 0x00, 0x00),
    '_': (0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0xFE),
    '`': (0x60, 0x10, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00),
    'a': (0x00, 0x00, 0x7C, 0x7C, 0xEC, 0xFC, 0x00, 0x00),
    'b': (0x40, 0x60, 0x7C, 0x6E, 0x6C, 0x7C, 0x00, 0x00),
    'c': (0x00, 0x00, 0x7C, 0x60, 0x60, 0x7C, 0x00, 0x00),
    'd': (0x04, 0x0C, 0x7C, 0xCC, 0xCC, 0x7C, 0x00, 0x00),
    'e': (0x00, 0x00, 0x7C, 0xFE, 0xE0, 0x7C, 0x00, 0x00),
    'f': (0x1C, 0x3C, 0x7C, 0x30, 0x30, 0x30, 0x00, 0x00),
    'g': (0x00, 0x00, 0x7C, 0xCC, 0xEC, 0x7C, 0x7C, 0x78),
    'h': (0x40, 0x60, 0x7C, 0x6C, 0x6C, 0x6C, 0x00, 0x00),
    'i': (0x18, 0x10, 0x78, 0x18, 0x18, 0x7C, 0x00, 0x00),
    'j': (0x18, 0x10, 0x78, 0x18, 0x18, 0x18, 0x38, 0x70),
    'k': (0x40, 0x60, 0x6C, 0x78, 0x78, 0x6C, 0x00, 0x00),
    'l': (0x70, 0x70, 0x30, 0x30, 0x30, 0x3C, 0x00, 0x00),
    'm': (0x00, 0x00, 0xFC, 0xF6, 0xF6, 0xF6, 0x00, 0x00),
    'n': (0x00, 0x00, 0x7C, 0x6C, 0x6C, 0x6C, 0x00, 0x00),
    'o': (0x00, 0x00, 0x7C, 0xCC, 0xEC, 0x7C, 0x00, 0x00),
    'p': (0x00, 0x00, 0x7C, 0x6E, 0x6C, 0x7C, 0x60, 0x40),
    'q': (0x00, 0x00, 0x7C, 0xCC, 0xCC, 0x7C, 0x0C, 0x0C),
    'r': (0x00, 0x00, 0x7E, 0x70, 0x60, 0x60, 0x00, 0x00),
    's': (0x00, 0x00, 0x7C, 0x78, 0x1C, 0x7C, 0x00, 0x00),
    't': (0x00, 0x30, 0xFC, 0x30, 0x30, 0x3C, 0x00, 0x00),
    'u': (0x00, 0x00, 0x6C, 0x6C, 0x6C, 0x7C, 0x00, 0x00),
    'v': (0x00, 0x00, 0xCC, 0x6C, 0x78, 0x38, 0x00, 0x00),
    'w': (0x00, 0x00, 0xC6, 0xF6, 0xFC, 0x6C, 0x00, 0x00),
    'x': (0x00, 0x00, 0x6C, 0x38, 0x38, 0x6C, 0x00, 0x00),
    'y': (0x00, 0x00, 0xCC, 0x6C, 0x38, 0x38, 0x30, 0x60),
    'z': (0x00, 0x00, 0x7C, 0x18, 0x30, 0x7C, 0x00, 0x00),
    '{': (0x0C, 0x3C, 0x30, 0x70, 0x30, 0x30, 0x3C, 0x0C),
    '|': (0x10, 0x30, 0x30, 0x30, 0x30, 0x30, 0x30, 0x30),
    '}': (0x60, 0x70, 0x30, 0x1C, 0x38, 0x30, 0x70, 0x60),
    '~': (0x00, 0x00, 0x00, 0x7C, 0x0C, 0x00, 0x00, 0x00),
}
