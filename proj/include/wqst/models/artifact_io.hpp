#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>

// Whitespace-separated token helpers for the model artifact format. Doubles
// are written in shortest round-trip form so reloaded models predict
// bit-identically.
namespace wqst::detail::artifact {

void put(std::ostream& out, const std::string& tag, double v);
void put(std::ostream& out, const std::string& tag, std::int64_t v);
void put(std::ostream& out, const std::string& tag, const Eigen::VectorXd& v);
void put(std::ostream& out, const std::string& tag, const Eigen::MatrixXd& m);
void put(std::ostream& out, const std::string& tag, const std::vector<double>& v);

// Each getter checks that the next token equals `tag`; ParseError otherwise.
double get_double(std::istream& in, const std::string& tag);
std::int64_t get_int(std::istream& in, const std::string& tag);
Eigen::VectorXd get_vector(std::istream& in, const std::string& tag);
Eigen::MatrixXd get_matrix(std::istream& in, const std::string& tag);
std::vector<double> get_doubles(std::istream& in, const std::string& tag);

std::string next_token(std::istream& in);
double parse_token_double(const std::string& token);
std::int64_t parse_token_int(const std::string& token);
void expect(std::istream& in, const std::string& tag);

}  // namespace wqst::detail::artifact
