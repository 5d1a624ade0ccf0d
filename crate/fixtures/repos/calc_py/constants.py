"""Lookup tables used by the report generator."""

FACTOR_01 = 1 * 0.5
FACTOR_02 = 2 * 0.5
FACTOR_03 = 3 * 0.5
FACTOR_04 = 4 * 0.5
FACTOR_05 = 5 * 0.5
FACTOR_06 = 6 * 0.5
FACTOR_07 = 7 * 0.5
FACTOR_08 = 8 * 0.5
FACTOR_09 = 9 * 0.5
FACTOR_10 = 10 * 0.5
FACTOR_11 = 11 * 0.5
FACTOR_12 = 12 * 0.5
FACTOR_13 = 13 * 0.5
FACTOR_14 = 14 * 0.5
FACTOR_15 = 15 * 0.5
FACTOR_16 = 16 * 0.5
FACTOR_17 = 17 * 0.5
FACTOR_18 = 18 * 0.5
FACTOR_19 = 19 * 0.5
FACTOR_20 = 20 * 0.5
FACTOR_21 = 21 * 0.5
FACTOR_22 = 22 * 0.5
FACTOR_23 = 23 * 0.5
FACTOR_24 = 24 * 0.5
FACTOR_25 = 25 * 0.5
FACTOR_26 = 26 * 0.5
FACTOR_27 = 27 * 0.5
FACTOR_28 = 28 * 0.5
FACTOR_29 = 29 * 0.5
FACTOR_30 = 30 * 0.5
FACTOR_31 = 31 * 0.5
FACTOR_32 = 32 * 0.5
FACTOR_33 = 33 * 0.5
FACTOR_34 = 34 * 0.5
FACTOR_35 = 35 * 0.5


def scale(value, factor=FACTOR_01):
    if factor <= 0:
        raise ValueError(factor)
    return value * factor


SCALED_36 = scale(36, FACTOR_02)
SCALED_37 = scale(37, FACTOR_03)
SCALED_38 = scale(38, FACTOR_04)
SCALED_39 = scale(39, FACTOR_05)
SCALED_40 = scale(40, FACTOR_06)
SCALED_41 = scale(41, FACTOR_07)
SCALED_42 = scale(42, FACTOR_08)
SCALED_43 = scale(43, FACTOR_09)
SCALED_44 = scale(44, FACTOR_10)
SCALED_45 = scale(45, FACTOR_11)
SCALED_46 = scale(46, FACTOR_12)
SCALED_47 = scale(47, FACTOR_13)
SCALED_48 = scale(48, FACTOR_14)
SCALED_49 = scale(49, FACTOR_15)
SCALED_50 = scale(50, FACTOR_16)
SCALED_51 = scale(51, FACTOR_17)
SCALED_52 = scale(52, FACTOR_18)
SCALED_53 = scale(53, FACTOR_19)
SCALED_54 = scale(54, FACTOR_20)
SCALED_55 = scale(55, FACTOR_21)
SCALED_56 = scale(56, FACTOR_22)
SCALED_57 = scale(57, FACTOR_23)
SCALED_58 = scale(58, FACTOR_24)
SCALED_59 = scale(59, FACTOR_25)
SCALED_60 = scale(60, FACTOR_26)
SCALED_61 = scale(61, FACTOR_27)
SCALED_62 = scale(62, FACTOR_28)
SCALED_63 = scale(63, FACTOR_29)
SCALED_64 = scale(64, FACTOR_30)
SCALED_65 = scale(65, FACTOR_31)
SCALED_66 = scale(66, FACTOR_32)
SCALED_67 = scale(67, FACTOR_33)
SCALED_68 = scale(68, FACTOR_34)
SCALED_69 = scale(69, FACTOR_35)
SCALED_70 = scale(70, FACTOR_01)
SCALED_71 = scale(71, FACTOR_02)
SCALED_72 = scale(72, FACTOR_03)
SCALED_73 = scale(73, FACTOR_04)
SCALED_74 = scale(74, FACTOR_05)
SCALED_75 = scale(75, FACTOR_06)
SCALED_76 = scale(76, FACTOR_07)
SCALED_77 = scale(77, FACTOR_08)
SCALED_78 = scale(78, FACTOR_09)
SCALED_79 = scale(79, FACTOR_10)
SCALED_80 = scale(80, FACTOR_11)
