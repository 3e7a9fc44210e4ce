//! Parity-bit address table of the DVB-S2 normal-frame LDPC code, rate 4/5
//! (ETSI EN 302 307-1, Annex B, table B.8).
//!
//! Row `i` lists the parity accumulator addresses of the first information
//! bit of group `i`; the other 359 bits of the group use the same addresses
//! advanced by `j * Q` modulo the parity length.

pub const N: usize = 64_800;
pub const K: usize = 51_840;
pub const Q: usize = 36;

#[rustfmt::skip]
pub static ADDRESSES: [&[u16]; 144] = [
    &[0, 149, 11212, 5575, 6360, 12559, 8108, 8505, 408, 10026, 12828],
    &[1, 5237, 490, 10677, 4998, 3869, 3734, 3092, 3509, 7703, 10305],
    &[2, 8742, 5553, 2820, 7085, 12116, 10485, 564, 7795, 2972, 2157],
    &[3, 2699, 4304, 8350, 712, 2841, 3250, 4731, 10105, 517, 7516],
    &[4, 12067, 1351, 11992, 12191, 11267, 5161, 537, 6166, 4246, 2363],
    &[5, 6828, 7107, 2127, 3724, 5743, 11040, 10756, 4073, 1011, 3422],
    &[6, 11259, 1216, 9526, 1466, 10816, 940, 3744, 2815, 11506, 11573],
    &[7, 4549, 11507, 1118, 1274, 11751, 5207, 7854, 12803, 4047, 6484],
    &[8, 8430, 4115, 9440, 413, 4455, 2262, 7915, 12402, 8579, 7052],
    &[9, 3885, 9126, 5665, 4505, 2343, 253, 4707, 3742, 4166, 1556],
    &[10, 1704, 8936, 6775, 8639, 8179, 7954, 8234, 7850, 8883, 8713],
    &[11, 11716, 4344, 9087, 11264, 2274, 8832, 9147, 11930, 6054, 5455],
    &[12, 7323, 3970, 10329, 2170, 8262, 3854, 2087, 12899, 9497, 11700],
    &[13, 4418, 1467, 2490, 5841, 817, 11453, 533, 11217, 11962, 5251],
    &[14, 1541, 4525, 7976, 3457, 9536, 7725, 3788, 2982, 6307, 5997],
    &[15, 11484, 2739, 4023, 12107, 6516, 551, 2572, 6628, 8150, 9852],
    &[16, 6070, 1761, 4627, 6534, 7913, 3730, 11866, 1813, 12306, 8249],
    &[17, 12441, 5489, 8748, 7837, 7660, 2102, 11341, 2936, 6712, 11977],
    &[18, 10155, 4210],
    &[19, 1010, 10483],
    &[20, 8900, 10250],
    &[21, 10243, 12278],
    &[22, 7070, 4397],
    &[23, 12271, 3887],
    &[24, 11980, 6836],
    &[25, 9514, 4356],
    &[26, 7137, 10281],
    &[27, 11881, 2526],
    &[28, 1969, 11477],
    &[29, 3044, 10921],
    &[30, 2236, 8724],
    &[31, 9104, 6340],
    &[32, 7342, 8582],
    &[33, 11675, 10405],
    &[34, 6467, 12775],
    &[35, 3186, 12198],
    &[0, 9621, 11445],
    &[1, 7486, 5611],
    &[2, 4319, 4879],
    &[3, 2196, 344],
    &[4, 7527, 6650],
    &[5, 10693, 2440],
    &[6, 6755, 2706],
    &[7, 5144, 5998],
    &[8, 11043, 8033],
    &[9, 4846, 4435],
    &[10, 4157, 9228],
    &[11, 12270, 6562],
    &[12, 11954, 7592],
    &[13, 7420, 2592],
    &[14, 8810, 9636],
    &[15, 689, 5430],
    &[16, 920, 1304],
    &[17, 1253, 11934],
    &[18, 9559, 6016],
    &[19, 312, 7589],
    &[20, 4439, 4197],
    &[21, 4002, 9555],
    &[22, 12232, 7779],
    &[23, 1494, 8782],
    &[24, 10749, 3969],
    &[25, 4368, 3479],
    &[26, 6316, 5342],
    &[27, 2455, 3493],
    &[28, 12157, 7405],
    &[29, 6598, 11495],
    &[30, 11805, 4455],
    &[31, 9625, 2090],
    &[32, 4731, 2321],
    &[33, 3578, 2608],
    &[34, 8504, 1849],
    &[35, 4027, 1151],
    &[0, 5647, 4935],
    &[1, 4219, 1870],
    &[2, 10968, 8054],
    &[3, 6970, 5447],
    &[4, 3217, 5638],
    &[5, 8972, 669],
    &[6, 5618, 12472],
    &[7, 1457, 1280],
    &[8, 8868, 3883],
    &[9, 8866, 1224],
    &[10, 8371, 5972],
    &[11, 266, 4405],
    &[12, 3706, 3244],
    &[13, 6039, 5844],
    &[14, 7200, 3283],
    &[15, 1502, 11282],
    &[16, 12318, 2202],
    &[17, 4523, 965],
    &[18, 9587, 7011],
    &[19, 2552, 2051],
    &[20, 12045, 10306],
    &[21, 11070, 5104],
    &[22, 6627, 6906],
    &[23, 9889, 2121],
    &[24, 829, 9701],
    &[25, 2201, 1819],
    &[26, 6689, 12925],
    &[27, 2139, 8757],
    &[28, 12004, 5948],
    &[29, 8704, 3191],
    &[30, 8171, 10933],
    &[31, 6297, 7116],
    &[32, 616, 7146],
    &[33, 5142, 9761],
    &[34, 10377, 8138],
    &[35, 7616, 5811],
    &[0, 7285, 9863],
    &[1, 7764, 10867],
    &[2, 12343, 9019],
    &[3, 4414, 8331],
    &[4, 3464, 642],
    &[5, 6960, 2039],
    &[6, 786, 3021],
    &[7, 710, 2086],
    &[8, 7423, 5601],
    &[9, 8120, 4885],
    &[10, 12385, 11990],
    &[11, 9739, 10034],
    &[12, 424, 10162],
    &[13, 1347, 7597],
    &[14, 1450, 112],
    &[15, 7965, 8478],
    &[16, 8945, 7397],
    &[17, 6590, 8316],
    &[18, 6838, 9011],
    &[19, 6174, 9410],
    &[20, 255, 113],
    &[21, 6197, 5835],
    &[22, 12902, 3844],
    &[23, 4377, 3505],
    &[24, 5478, 8672],
    &[25, 4453, 2132],
    &[26, 9724, 1380],
    &[27, 12131, 11526],
    &[28, 12323, 9511],
    &[29, 8231, 1752],
    &[30, 497, 9022],
    &[31, 9288, 3080],
    &[32, 2481, 7515],
    &[33, 2696, 268],
    &[34, 4023, 12341],
    &[35, 7108, 5553],
];
