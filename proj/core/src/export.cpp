#include "par/export.hpp"

#include <algorithm>
#include <fstream>
#include <map>

#include "par/csv.hpp"

namespace par {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw AnalysisError("cannot write " + path.string());
  return out;
}

std::string xml_escape(const std::string& text) {
  std::string out;
  for (char ch : text) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(ch);
    }
  }
  return out;
}

}  // namespace

void write_embeddings(const std::filesystem::path& path, const Matrix& x, std::span<const EntityId> rows) {
  auto out = open_out(path);
  csv::Row header{"id"};
  for (Index c = 0; c < x.cols(); ++c) header.push_back("e" + std::to_string(c));
  csv::write_row(out, header);
  for (EntityId id : rows) {
    csv::Row row{std::to_string(id)};
    for (Index c = 0; c < x.cols(); ++c) row.push_back(csv::format_double(x(static_cast<Index>(id), c)));
    csv::write_row(out, row);
  }
}

std::pair<std::vector<EntityId>, Matrix> read_embeddings(const std::filesystem::path& path) {
  csv::Table table;
  try {
    table = csv::read_file(path);
  } catch (const std::exception& e) {
    throw AnalysisError(e.what());
  }
  if (table.header.size() < 2 || table.header[0] != "id") throw AnalysisError(path.string() + ": unexpected header");
  const auto dim = static_cast<Index>(table.header.size() - 1);
  std::vector<EntityId> ids;
  Matrix x(static_cast<Index>(table.rows.size()), dim);
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    try {
      if (static_cast<Index>(row.size()) != dim + 1) throw AnalysisError("wrong field count");
      const long long id = csv::parse_int(row[0]);
      if (id < 0) throw AnalysisError("negative id");
      ids.push_back(static_cast<EntityId>(id));
      for (Index c = 0; c < dim; ++c) x(static_cast<Index>(r), c) = csv::parse_double(row[static_cast<std::size_t>(c) + 1]);
    } catch (const std::exception& e) {
      throw AnalysisError(path.string() + ":" + std::to_string(table.line_numbers[r]) + ": " + e.what());
    }
  }
  return {std::move(ids), std::move(x)};
}

void write_stances(const std::filesystem::path& path, const Hin& hin, std::span<const StanceScore> scores) {
  auto out = open_out(path);
  csv::Row header{"id", "name"};
  for (int c = 0; c < kNumClasses; ++c) header.push_back("l" + std::to_string(c));
  for (int c = 0; c < kNumClasses; ++c) header.push_back("c" + std::to_string(c));
  header.insert(header.end(), {"lib_cont", "con_cont", "label"});
  csv::write_row(out, header);
  for (const auto& s : scores) {
    csv::Row row{std::to_string(s.entity), hin.node(s.entity).name};
    for (double p : s.liberal) row.push_back(csv::format_double(p));
    for (double p : s.conservative) row.push_back(csv::format_double(p));
    row.push_back(csv::format_double(s.liberal_continuous));
    row.push_back(csv::format_double(s.conservative_continuous));
    row.push_back(s.label);
    csv::write_row(out, row);
  }
}

void write_projection_csv(const std::filesystem::path& path, const Hin& hin, std::span<const ProjectedPoint> points) {
  auto out = open_out(path);
  csv::write_row(out, {"id", "name", "kind", "px", "py", "group"});
  for (const auto& p : points)
    csv::write_row(out, {std::to_string(p.entity), hin.node(p.entity).name, std::string(to_string(hin.node(p.entity).kind)),
                         csv::format_double(p.x), csv::format_double(p.y), p.group});
}

void write_projection_svg(const std::filesystem::path& path, std::span<const ProjectedPoint> points) {
  static const std::array<const char*, 10> palette = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                                      "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
  constexpr double size = 600.0, margin = 40.0;
  double min_x = 0, max_x = 1, min_y = 0, max_y = 1;
  if (!points.empty()) {
    min_x = max_x = points[0].x;
    min_y = max_y = points[0].y;
    for (const auto& p : points) {
      min_x = std::min(min_x, p.x);
      max_x = std::max(max_x, p.x);
      min_y = std::min(min_y, p.y);
      max_y = std::max(max_y, p.y);
    }
  }
  const double span_x = max_x > min_x ? max_x - min_x : 1.0;
  const double span_y = max_y > min_y ? max_y - min_y : 1.0;

  std::map<std::string, std::size_t> colour;
  for (const auto& p : points) colour.try_emplace(p.group, colour.size());

  auto out = open_out(path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size + 160 << "\" height=\"" << size << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (const auto& p : points) {
    const double cx = margin + (p.x - min_x) / span_x * (size - 2 * margin);
    const double cy = size - margin - (p.y - min_y) / span_y * (size - 2 * margin);
    out << "<circle cx=\"" << csv::format_double(cx) << "\" cy=\"" << csv::format_double(cy) << "\" r=\"3\" fill=\""
        << palette[colour[p.group] % palette.size()] << "\" fill-opacity=\"0.8\"/>\n";
  }
  double y = margin;
  for (const auto& [group, idx] : colour) {
    out << "<circle cx=\"" << size + 10 << "\" cy=\"" << y << "\" r=\"5\" fill=\"" << palette[idx % palette.size()]
        << "\"/><text x=\"" << size + 22 << "\" y=\"" << y + 4 << "\" font-size=\"12\" font-family=\"sans-serif\">"
        << xml_escape(group) << "</text>\n";
    y += 18;
  }
  out << "</svg>\n";
}

}  // namespace par
