#pragma once
// CSV rendering (comma separated, '.' decimal, header row, LF endings).
// Numbers use the shortest round-trip representation, so identical values
// always produce identical bytes.

#include <charconv>
#include <cstdint>
#include <string>
#include <string_view>
#include <system_error>
#include <type_traits>
#include <vector>

#include "qshaper/bases.hpp"
#include "qshaper/measurement.hpp"
#include "qshaper/shaper.hpp"
#include "qshaper/spectral_field.hpp"

namespace qshaper::io {

inline std::string format_number(double value) {
  char buffer[64];
  const auto [end, ec] = std::to_chars(buffer, buffer + sizeof buffer, value);
  if (ec != std::errc{}) return "nan";
  return std::string(buffer, end);
}

inline std::string format_number(std::int64_t value) {
  char buffer[32];
  const auto [end, ec] = std::to_chars(buffer, buffer + sizeof buffer, value);
  return std::string(buffer, end);
}

class CsvWriter {
 public:
  explicit CsvWriter(const std::vector<std::string>& header) : columns_(header.size()) {
    for (std::size_t k = 0; k < header.size(); ++k) {
      if (k) out_ += ',';
      out_ += header[k];
    }
    out_ += '\n';
  }

  template <class... Values>
  void row(const Values&... values) {
    bool first = true;
    ((append(values, first)), ...);
    out_ += '\n';
  }

  void row(const std::vector<double>& values) {
    bool first = true;
    for (double v : values) append(v, first);
    out_ += '\n';
  }

  const std::string& str() const { return out_; }
  std::size_t columns() const { return columns_; }

 private:
  template <class T>
  void append(const T& value, bool& first) {
    if (!first) out_ += ',';
    first = false;
    if constexpr (std::is_integral_v<T>)
      out_ += format_number(static_cast<std::int64_t>(value));
    else if constexpr (std::is_convertible_v<T, std::string_view>)
      out_ += std::string_view(value);
    else
      out_ += format_number(static_cast<double>(value));
  }

  std::size_t columns_;
  std::string out_;
};

inline std::string fringe_csv(const FringeScan& scan) {
  CsvWriter csv({"phi_rad", "signal"});
  for (std::size_t k = 0; k < scan.size(); ++k) csv.row(scan.phi[k], scan.signal[k]);
  return csv.str();
}

inline std::string counts_csv(const CountRecord& record) {
  CsvWriter csv({"phi_rad", "gross", "background", "duration_s"});
  for (std::size_t k = 0; k < record.size(); ++k)
    csv.row(record.phi[k], record.gross[k], record.background[k], record.duration_s);
  return csv.str();
}

/// Every `stride`-th sample along both axes.
inline std::string amplitude_csv(const JointAmplitude& amp, int stride = 1) {
  if (stride < 1) stride = 1;
  CsvWriter csv({"omega_i", "omega_s", "re", "im"});
  const auto& grid = amp.grid();
  for (int i = 0; i < grid.size(); i += stride)
    for (int j = 0; j < grid.size(); j += stride)
      csv.row(grid.omega(i), grid.omega(j), amp.values()(i, j).real(), amp.values()(i, j).imag());
  return csv.str();
}

inline std::string basis_csv(const BasisSet& basis) {
  std::vector<std::string> header{"omega"};
  for (int j = 0; j < basis.dimension(); ++j) {
    header.push_back("re_f" + std::to_string(j));
    header.push_back("im_f" + std::to_string(j));
  }
  CsvWriter csv(header);
  for (int k = 0; k < basis.grid.size(); ++k) {
    std::vector<double> row{basis.grid.omega(k)};
    for (int j = 0; j < basis.dimension(); ++j) {
      row.push_back(basis.functions(k, j).real());
      row.push_back(basis.functions(k, j).imag());
    }
    csv.row(row);
  }
  return csv.str();
}

inline std::string transfer_csv(const TransferFunction& m) {
  CsvWriter csv({"omega", "re", "im", "abs"});
  for (int k = 0; k < m.grid().size(); ++k) {
    const cdouble v = m.samples()[k];
    csv.row(m.grid().omega(k), v.real(), v.imag(), std::abs(v));
  }
  return csv.str();
}

}  // namespace qshaper::io
