#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "qmatch/cli.hpp"
#include "qmatch/errors.hpp"

namespace qmatch::cli {

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    fields.push_back(line.substr(start, comma == std::string_view::npos ? comma : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

template <typename T>
T parse_field(std::string_view field, const std::filesystem::path& path, std::size_t line_no) {
  T v{};
  const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
  if (res.ec != std::errc() || res.ptr != field.data() + field.size()) {
    std::ostringstream msg;
    msg << path.string() << ":" << line_no << ": cannot parse '" << field << "'";
    throw DomainError(msg.str());
  }
  return v;
}

std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw IoError("write to '" + path.string() + "' failed");
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_data_csv(const std::filesystem::path& path, const DataSet& data) {
  auto out = open_for_write(path);
  out << "index,row,col,y\n";
  for (std::size_t k = 0; k < data.y.size(); ++k) {
    out << k << ',' << data.layout[k].row << ',' << data.layout[k].col << ','
        << format_double(data.y[k]) << '\n';
  }
  finish(out, path);
}

DataSet read_data_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::string line;
  if (!std::getline(in, line)) throw DomainError(path.string() + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();

  const auto header = split_fields(line);
  int col_row = -1;
  int col_col = -1;
  int col_y = -1;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == "row") col_row = static_cast<int>(i);
    if (header[i] == "col") col_col = static_cast<int>(i);
    if (header[i] == "y") col_y = static_cast<int>(i);
  }
  if (col_row < 0 || col_col < 0 || col_y < 0) {
    throw DomainError(path.string() + ": header must name the columns row, col and y");
  }

  DataSet data;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != header.size()) {
      std::ostringstream msg;
      msg << path.string() << ":" << line_no << ": expected " << header.size() << " fields";
      throw DomainError(msg.str());
    }
    Cell cell{parse_field<std::size_t>(fields[col_row], path, line_no),
              parse_field<std::size_t>(fields[col_col], path, line_no)};
    data.nrows = std::max(data.nrows, cell.row + 1);
    data.ncols = std::max(data.ncols, cell.col + 1);
    data.layout.push_back(cell);
    data.y.push_back(parse_field<double>(fields[col_y], path, line_no));
  }
  if (data.y.empty()) throw DomainError(path.string() + ": no data rows");
  return data;
}

void write_curve_csv(const std::filesystem::path& path, const ProfileCurve& curve) {
  auto out = open_for_write(path);
  out << "param,value,det_term,jacobian_term\n";
  for (const auto& p : curve.points) {
    out << format_double(p.param);
    if (p.ok) {
      out << ',' << format_double(p.value) << ',' << format_double(p.det_term) << ','
          << format_double(p.jacobian_term);
    } else {
      out << ",,,";
    }
    out << '\n';
  }
  finish(out, path);
}

}  // namespace qmatch::cli
