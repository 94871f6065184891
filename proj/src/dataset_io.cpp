#include "fsts/dataset_io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

namespace fsts {

namespace {

constexpr char kMagic[4] = {'F', 'S', 'T', 'S'};
constexpr uint16_t kFormatVersion = 1;

bool parse_number(std::string_view field, double& out) {
  const char* first = field.data();
  const char* last = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc{} && ptr == last;
}

std::vector<std::string_view> split_fields(std::string_view line, char delim) {
  std::vector<std::string_view> fields;
  size_t start = 0;
  while (start <= line.size()) {
    size_t end = line.find(delim, start);
    if (end == std::string_view::npos) end = line.size();
    std::string_view f = line.substr(start, end - start);
    while (!f.empty() && (f.front() == ' ' || f.front() == '\r')) f.remove_prefix(1);
    while (!f.empty() && (f.back() == ' ' || f.back() == '\r')) f.remove_suffix(1);
    if (!f.empty()) fields.push_back(f);
    if (end == line.size()) break;
    start = end + 1;
  }
  return fields;
}

char resolve_delimiter(Delimiter d, std::string_view first_line) {
  switch (d) {
    case Delimiter::tab: return '\t';
    case Delimiter::comma: return ',';
    case Delimiter::auto_detect:
      return first_line.find('\t') != std::string_view::npos ? '\t' : ',';
  }
  return ',';
}

struct RawRecord {
  long long label;
  std::vector<float> values;
};

// Maps the numeric labels seen in the file to contiguous ids in ascending
// label order, so class 0 is always the smallest label.
void build_ucr_dataset(Dataset& ds, std::vector<RawRecord>& records) {
  std::map<long long, int32_t> ids;
  for (const RawRecord& r : records) ids.emplace(r.label, 0);
  ds.label_names.clear();
  int32_t next = 0;
  for (auto& [raw, id] : ids) {
    id = next++;
    ds.label_names.push_back(std::to_string(raw));
  }
  ds.series.clear();
  ds.series.reserve(records.size());
  for (RawRecord& r : records) {
    TimeSeries ts;
    ts.values = std::move(r.values);
    ts.original_length = static_cast<int64_t>(ts.values.size());
    ts.label = ids.at(r.label);
    ds.series.push_back(std::move(ts));
  }
}

std::vector<RawRecord> parse_ucr_records(std::istream& in, const std::string& origin,
                                         Delimiter delimiter) {
  std::vector<RawRecord> records;
  std::string line;
  size_t line_no = 0;
  char delim = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    if (delim == 0) delim = resolve_delimiter(delimiter, line);
    const auto fields = split_fields(line, delim);
    if (fields.size() < 2) {
      throw InputError(origin + ":" + std::to_string(line_no) +
                       ": expected a label followed by at least one sample");
    }
    double label_value = 0;
    if (!parse_number(fields[0], label_value)) {
      throw InputError(origin + ":" + std::to_string(line_no) + ": non-numeric label '" +
                       std::string(fields[0]) + "'");
    }
    RawRecord rec;
    rec.label = std::llround(label_value);
    rec.values.reserve(fields.size() - 1);
    for (size_t i = 1; i < fields.size(); ++i) {
      double v = 0;
      if (!parse_number(fields[i], v)) {
        throw InputError(origin + ":" + std::to_string(line_no) + ": non-numeric field '" +
                         std::string(fields[i]) + "'");
      }
      rec.values.push_back(static_cast<float>(v));
    }
    records.push_back(std::move(rec));
  }
  if (records.empty()) throw InputError(origin + ": no records found");
  return records;
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path + "'");
  return in;
}

std::string stem_of(const std::string& path) {
  size_t slash = path.find_last_of("/\\");
  std::string base = slash == std::string::npos ? path : path.substr(slash + 1);
  size_t dot = base.find_last_of('.');
  return dot == std::string::npos ? base : base.substr(0, dot);
}

}  // namespace

Dataset parse_ucr_stream(std::istream& in, const std::string& origin, Delimiter delimiter) {
  Dataset ds;
  ds.name = origin;
  auto records = parse_ucr_records(in, origin, delimiter);
  build_ucr_dataset(ds, records);
  return ds;
}

Dataset parse_ucr(const std::string& path, Delimiter delimiter) {
  auto in = open_input(path);
  Dataset ds = parse_ucr_stream(in, path, delimiter);
  ds.name = stem_of(path);
  return ds;
}

void parse_ucr_into(Dataset& ds, const std::string& path, Delimiter delimiter) {
  auto in = open_input(path);
  auto records = parse_ucr_records(in, path, delimiter);
  // Re-derive the numeric labels of what is already loaded, then rebuild the
  // vocabulary over the union so ids stay contiguous and ascending.
  std::vector<RawRecord> merged;
  merged.reserve(ds.series.size() + records.size());
  for (TimeSeries& ts : ds.series) {
    double raw = 0;
    if (!parse_number(ds.label_names[static_cast<size_t>(ts.label)], raw)) {
      throw InputError("dataset '" + ds.name + "' has non-numeric label names; cannot merge");
    }
    merged.push_back({std::llround(raw), std::move(ts.values)});
  }
  for (RawRecord& r : records) merged.push_back(std::move(r));
  build_ucr_dataset(ds, merged);
}

namespace {

constexpr int kMitBihClasses = 5;
const char* const kBeatClassNames[kMitBihClasses] = {"N", "S", "V", "F", "Q"};

void parse_mitbih_records(Dataset& ds, std::istream& in, const std::string& origin) {
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = split_fields(line, ',');
    if (fields.size() < 2) {
      throw InputError(origin + ":" + std::to_string(line_no) +
                       ": expected samples followed by a class label");
    }
    double label_value = 0;
    if (!parse_number(fields.back(), label_value)) {
      throw InputError(origin + ":" + std::to_string(line_no) + ": non-numeric label '" +
                       std::string(fields.back()) + "'");
    }
    const long long label = std::llround(label_value);
    if (std::abs(label_value - static_cast<double>(label)) > 1e-9 || label < 0 ||
        label >= kMitBihClasses) {
      throw InputError(origin + ":" + std::to_string(line_no) + ": label " +
                       std::string(fields.back()) + " outside 0.." +
                       std::to_string(kMitBihClasses - 1));
    }
    TimeSeries ts;
    ts.label = static_cast<int32_t>(label);
    ts.values.reserve(fields.size() - 1);
    for (size_t i = 0; i + 1 < fields.size(); ++i) {
      double v = 0;
      if (!parse_number(fields[i], v)) {
        throw InputError(origin + ":" + std::to_string(line_no) + ": non-numeric field '" +
                         std::string(fields[i]) + "'");
      }
      ts.values.push_back(static_cast<float>(v));
    }
    // The export post-pads beats with zeros; keep the true beat as the
    // unpadded prefix so elastic distances can see it.
    int64_t n = static_cast<int64_t>(ts.values.size());
    while (n > 1 && ts.values[static_cast<size_t>(n - 1)] == 0.0f) --n;
    ts.original_length = n;
    ds.series.push_back(std::move(ts));
  }
  if (ds.series.empty()) throw InputError(origin + ": no records found");
}

}  // namespace

Dataset parse_mitbih_stream(std::istream& in, const std::string& origin) {
  Dataset ds;
  ds.name = origin;
  ds.role = DatasetRole::test;
  ds.label_names.assign(kBeatClassNames, kBeatClassNames + kMitBihClasses);
  parse_mitbih_records(ds, in, origin);
  return ds;
}

Dataset parse_mitbih(const std::string& path) {
  auto in = open_input(path);
  Dataset ds = parse_mitbih_stream(in, path);
  ds.name = stem_of(path);
  return ds;
}

void parse_mitbih_into(Dataset& ds, const std::string& path) {
  auto in = open_input(path);
  parse_mitbih_records(ds, in, path);
}

// --------------------------------------------------------------------------
// canonical binary format

namespace {

void put_u16(std::ostream& out, uint16_t v) {
  const char bytes[2] = {static_cast<char>(v & 0xff), static_cast<char>(v >> 8)};
  out.write(bytes, 2);
}

void put_u32(std::ostream& out, uint32_t v) {
  char bytes[4];
  for (int i = 0; i < 4; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(bytes, 4);
}

void put_u64(std::ostream& out, uint64_t v) {
  char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(bytes, 8);
}

void put_f32(std::ostream& out, float v) { put_u32(out, std::bit_cast<uint32_t>(v)); }

void put_string(std::ostream& out, const std::string& s) {
  put_u32(out, static_cast<uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

void need(std::istream& in, char* dst, size_t n, const std::string& path) {
  in.read(dst, static_cast<std::streamsize>(n));
  if (static_cast<size_t>(in.gcount()) != n) {
    throw TruncatedFileError("'" + path + "' is truncated");
  }
}

uint16_t get_u16(std::istream& in, const std::string& path) {
  unsigned char b[2];
  need(in, reinterpret_cast<char*>(b), 2, path);
  return static_cast<uint16_t>(b[0] | (b[1] << 8));
}

uint32_t get_u32(std::istream& in, const std::string& path) {
  unsigned char b[4];
  need(in, reinterpret_cast<char*>(b), 4, path);
  uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | b[i];
  return v;
}

uint64_t get_u64(std::istream& in, const std::string& path) {
  unsigned char b[8];
  need(in, reinterpret_cast<char*>(b), 8, path);
  uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
  return v;
}

float get_f32(std::istream& in, const std::string& path) {
  return std::bit_cast<float>(get_u32(in, path));
}

std::string get_string(std::istream& in, const std::string& path) {
  const uint32_t n = get_u32(in, path);
  if (n > (1u << 20)) throw TruncatedFileError("'" + path + "' declares an absurd string");
  std::string s(n, '\0');
  if (n > 0) need(in, s.data(), n, path);
  return s;
}

}  // namespace

void save_canonical(const Dataset& ds, const std::string& path) {
  ds.validate();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write '" + path + "'");
  out.write(kMagic, 4);
  put_u16(out, kFormatVersion);
  out.put(static_cast<char>(ds.role));
  put_string(out, ds.name);
  put_u32(out, static_cast<uint32_t>(ds.l_max));
  put_u32(out, static_cast<uint32_t>(ds.label_names.size()));
  for (const std::string& s : ds.label_names) put_string(out, s);
  put_u64(out, ds.series.size());
  for (const TimeSeries& ts : ds.series) {
    put_u32(out, static_cast<uint32_t>(ts.label));
    put_u32(out, static_cast<uint32_t>(ts.original_length));
    for (float v : ts.values) put_f32(out, v);
  }
  out.flush();
  if (!out) throw InputError("write to '" + path + "' failed");
}

Dataset load_canonical(const std::string& path) {
  auto in = open_input(path);
  char magic[4];
  need(in, magic, 4, path);
  if (std::memcmp(magic, kMagic, 4) != 0) {
    throw BadMagicError("'" + path + "' is not a canonical dataset file");
  }
  const uint16_t version = get_u16(in, path);
  if (version != kFormatVersion) {
    throw BadVersionError("'" + path + "' has format version " + std::to_string(version) +
                          ", expected " + std::to_string(kFormatVersion));
  }
  char role_byte = 0;
  need(in, &role_byte, 1, path);
  if (role_byte < 0 || role_byte > 2) {
    throw TruncatedFileError("'" + path + "' has a corrupt role byte");
  }
  Dataset ds;
  ds.role = static_cast<DatasetRole>(role_byte);
  ds.name = get_string(in, path);
  ds.l_max = get_u32(in, path);
  const uint32_t n_labels = get_u32(in, path);
  ds.label_names.reserve(n_labels);
  for (uint32_t i = 0; i < n_labels; ++i) ds.label_names.push_back(get_string(in, path));
  const uint64_t n_series = get_u64(in, path);
  ds.series.reserve(n_series);
  for (uint64_t i = 0; i < n_series; ++i) {
    TimeSeries ts;
    ts.label = static_cast<int32_t>(get_u32(in, path));
    ts.original_length = get_u32(in, path);
    ts.values.resize(static_cast<size_t>(ds.l_max));
    for (int64_t t = 0; t < ds.l_max; ++t) {
      ts.values[static_cast<size_t>(t)] = get_f32(in, path);
    }
    ds.series.push_back(std::move(ts));
  }
  ds.validate();
  return ds;
}

}  // namespace fsts
