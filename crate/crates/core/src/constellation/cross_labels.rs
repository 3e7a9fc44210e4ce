//! Label tables for the cross constellations.
//!
//! Entries are `(I, Q, label)` on the odd-integer grid before normalization.
//! Both tables were found by minimizing the summed Hamming distance over all
//! nearest-neighbour pairs: the 32-cross table has 4 neighbour pairs at
//! Hamming distance 2 (52 pairs in total), the 128-cross table has 16 such
//! excess bits over 232 pairs. The 128-cross search started from a 16x8
//! rectangular Gray grid whose outer columns are folded onto the top and
//! bottom rows.

#[rustfmt::skip]
pub static CROSS32: [(i8, i8, u8); 32] = [
    (-3, 5, 0b10010), (-1, 5, 0b10000), (1, 5, 0b10001), (3, 5, 0b10011), (-5, 3, 0b00110),
    (-3, 3, 0b10110), (-1, 3, 0b10100), (1, 3, 0b10101), (3, 3, 0b10111), (5, 3, 0b00111),
    (-5, 1, 0b00100), (-3, 1, 0b01100), (-1, 1, 0b11100), (1, 1, 0b11101), (3, 1, 0b01101),
    (5, 1, 0b00101), (-5, -1, 0b00000), (-3, -1, 0b01000), (-1, -1, 0b11000), (1, -1, 0b11001),
    (3, -1, 0b01001), (5, -1, 0b00001), (-5, -3, 0b00010), (-3, -3, 0b01010), (-1, -3, 0b11010),
    (1, -3, 0b11011), (3, -3, 0b01011), (5, -3, 0b00011), (-3, -5, 0b01110), (-1, -5, 0b11110),
    (1, -5, 0b11111), (3, -5, 0b01111),
];

#[rustfmt::skip]
pub static CROSS128: [(i8, i8, u8); 128] = [
    (-7, 11, 0b0000111), (-5, 11, 0b0001111), (-3, 11, 0b0001101), (-1, 11, 0b0000101),
    (1, 11, 0b1000101), (3, 11, 0b1001101), (5, 11, 0b1001111), (7, 11, 0b1000111),
    (-7, 9, 0b0000110), (-5, 9, 0b0001110), (-3, 9, 0b0001100), (-1, 9, 0b0000100),
    (1, 9, 0b1000100), (3, 9, 0b1001100), (5, 9, 0b1001110), (7, 9, 0b1000110),
    (-11, 7, 0b0011100), (-9, 7, 0b0010100), (-7, 7, 0b0110100), (-5, 7, 0b0111100),
    (-3, 7, 0b0101100), (-1, 7, 0b0100100), (1, 7, 0b1100100), (3, 7, 0b1101100),
    (5, 7, 0b1111100), (7, 7, 0b1110100), (9, 7, 0b1010100), (11, 7, 0b1011100),
    (-11, 5, 0b0011101), (-9, 5, 0b0010101), (-7, 5, 0b0110101), (-5, 5, 0b0111101),
    (-3, 5, 0b0101101), (-1, 5, 0b0100101), (1, 5, 0b1100101), (3, 5, 0b1101101),
    (5, 5, 0b1111101), (7, 5, 0b1110101), (9, 5, 0b1010101), (11, 5, 0b1011101),
    (-11, 3, 0b0011111), (-9, 3, 0b0010111), (-7, 3, 0b0110111), (-5, 3, 0b0111111),
    (-3, 3, 0b0101111), (-1, 3, 0b0100111), (1, 3, 0b1100111), (3, 3, 0b1101111),
    (5, 3, 0b1111111), (7, 3, 0b1110111), (9, 3, 0b1010111), (11, 3, 0b1011111),
    (-11, 1, 0b0011110), (-9, 1, 0b0010110), (-7, 1, 0b0110110), (-5, 1, 0b0111110),
    (-3, 1, 0b0101110), (-1, 1, 0b0100110), (1, 1, 0b1100110), (3, 1, 0b1101110),
    (5, 1, 0b1111110), (7, 1, 0b1110110), (9, 1, 0b1010110), (11, 1, 0b1011110),
    (-11, -1, 0b0011010), (-9, -1, 0b0010010), (-7, -1, 0b0110010), (-5, -1, 0b0111010),
    (-3, -1, 0b0101010), (-1, -1, 0b0100010), (1, -1, 0b1100010), (3, -1, 0b1101010),
    (5, -1, 0b1111010), (7, -1, 0b1110010), (9, -1, 0b1010010), (11, -1, 0b1011010),
    (-11, -3, 0b0011011), (-9, -3, 0b0010011), (-7, -3, 0b0110011), (-5, -3, 0b0111011),
    (-3, -3, 0b0101011), (-1, -3, 0b0100011), (1, -3, 0b1100011), (3, -3, 0b1101011),
    (5, -3, 0b1111011), (7, -3, 0b1110011), (9, -3, 0b1010011), (11, -3, 0b1011011),
    (-11, -5, 0b0011001), (-9, -5, 0b0010001), (-7, -5, 0b0110001), (-5, -5, 0b0111001),
    (-3, -5, 0b0101001), (-1, -5, 0b0100001), (1, -5, 0b1100001), (3, -5, 0b1101001),
    (5, -5, 0b1111001), (7, -5, 0b1110001), (9, -5, 0b1010001), (11, -5, 0b1011001),
    (-11, -7, 0b0011000), (-9, -7, 0b0010000), (-7, -7, 0b0110000), (-5, -7, 0b0111000),
    (-3, -7, 0b0101000), (-1, -7, 0b0100000), (1, -7, 0b1100000), (3, -7, 0b1101000),
    (5, -7, 0b1111000), (7, -7, 0b1110000), (9, -7, 0b1010000), (11, -7, 0b1011000),
    (-7, -9, 0b0000010), (-5, -9, 0b0001010), (-3, -9, 0b0001000), (-1, -9, 0b0000000),
    (1, -9, 0b1000000), (3, -9, 0b1001000), (5, -9, 0b1001010), (7, -9, 0b1000010),
    (-7, -11, 0b0000011), (-5, -11, 0b0001011), (-3, -11, 0b0001001), (-1, -11, 0b0000001),
    (1, -11, 0b1000001), (3, -11, 0b1001001), (5, -11, 0b1001011), (7, -11, 0b1000011),
];
