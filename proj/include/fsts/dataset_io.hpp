#pragma once

#include <iosfwd>
#include <string>

#include "fsts/timeseries.hpp"

namespace fsts {

enum class Delimiter { auto_detect, tab, comma };

// UCR-style text: one record per line, first field the integer class label,
// remaining fields the samples. Ragged lengths allowed; series come out
// unscaled and unpadded. Numeric labels are mapped to contiguous class ids
// in ascending label order.
Dataset parse_ucr(const std::string& path, Delimiter delimiter = Delimiter::auto_detect);
Dataset parse_ucr_stream(std::istream& in, const std::string& origin,
                         Delimiter delimiter = Delimiter::auto_detect);

// Appends another file's records to an existing parsed dataset (the archive
// ships separate train/test files for what is logically one collection).
void parse_ucr_into(Dataset& ds, const std::string& path,
                    Delimiter delimiter = Delimiter::auto_detect);

// Heartbeat CSV: samples first, trailing integer label in 0..4, mapped to
// the beat classes N, S, V, F, Q. Trailing zero samples are treated as
// padding and recorded as such.
Dataset parse_mitbih(const std::string& path);
Dataset parse_mitbih_stream(std::istream& in, const std::string& origin);
void parse_mitbih_into(Dataset& ds, const std::string& path);

// Canonical binary dataset format, magic "FSTS". Round-trips bitwise.
void save_canonical(const Dataset& ds, const std::string& path);
Dataset load_canonical(const std::string& path);

}  // namespace fsts
