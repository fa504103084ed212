#pragma once

// JSON run configuration. Every section is optional; omitted values take the
// values of default_campaign(). Length-like quantities accept either an SI
// key or a millimetre key (e.g. "x_f_m" / "x_f_mm"), never both. Unknown keys
// are rejected.

#include <stdexcept>
#include <string>
#include <vector>

#include "mes/harness.hpp"

namespace mes {

struct RunConfig {
    CampaignConfig campaign;
    int stride = 10;
    std::string output_dir = "out";
};

// Syntax error in the document; message carries line and column.
class ConfigParseError : public std::runtime_error {
  public:
    ConfigParseError(const std::string& msg, std::size_t line, std::size_t column)
        : std::runtime_error(msg), line_(line), column_(column) {}
    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

  private:
    std::size_t line_;
    std::size_t column_;
};

// Well-formed JSON that does not fit the schema. One entry per problem.
class ConfigSchemaError : public std::runtime_error {
  public:
    explicit ConfigSchemaError(std::vector<std::string> problems);
    const std::vector<std::string>& problems() const noexcept { return problems_; }

  private:
    std::vector<std::string> problems_;
};

RunConfig parse_config(const std::string& text);
RunConfig load_config_file(const std::string& path);

// Default configuration as a JSON document, for `mes-autotune` users to edit.
std::string default_config_json();

} // namespace mes
