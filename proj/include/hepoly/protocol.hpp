/**
 * @file protocol.hpp
 * @brief Three-party workflow and the benchmark harness.
 *
 * Roles: the data owner hands plaintext data to the trusted party, which
 * holds the only secret key, encrypts the dataset, and later decrypts final
 * aggregates and serves the distance-ordering oracle. The training server
 * sees ciphertexts only; its type carries no key material at all, so a
 * decryption on the server side cannot even be written. Everything runs
 * in-process; the ciphertext wire formats exist, so a networked deployment
 * is a transport swap.
 *
 * The trusted party is a single point of failure: whoever holds that key
 * can read every dataset. Threshold or multi-key decryption would remove
 * it, at the cost of a different protocol.
 *
 * @license Apache-2.0
 */

#ifndef HEPOLY_PROTOCOL_HPP
#define HEPOLY_PROTOCOL_HPP

#include <cstdint>
#include <mutex>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "hepoly/ckks.hpp"
#include "hepoly/data.hpp"
#include "hepoly/knn.hpp"
#include "hepoly/mlp.hpp"
#include "hepoly/regression.hpp"

namespace hepoly::protocol {

/// What the server learns from one ordering-oracle call: list length and k.
/// Distance values are never recorded.
struct OracleLogEntry {
    std::size_t list_length = 0;
    std::size_t k = 0;
};

/// Holds the secret key; the only role that can encrypt or decrypt.
/// Counters are synchronized so concurrent repeats can share one instance.
class TrustedParty final : public regression::AggregateDecryptor,
                           public knn::OrderingOracle {
public:
    TrustedParty(const ckks::SchemeParams& params, ckks::SecretKey sk,
                 std::uint64_t noise_seed);
    static TrustedParty from_key_file(const std::filesystem::path& path,
                                      std::uint64_t noise_seed);

    ckks::Ciphertext encrypt_value(double m);
    data::EncryptedDataset encrypt_dataset(const data::Dataset& scaled);

    double decrypt_value(const ckks::Ciphertext& ct);
    std::vector<double> decrypt_results(std::span<const ckks::Ciphertext> cts);
    double decrypt_aggregate(const ckks::Ciphertext& ct) override;

    /// Decrypts internally and returns index order only; logs one call.
    /// Oracle-internal decryptions do not hit the decryption counter.
    std::vector<std::size_t> smallest_k(std::span<const ckks::Ciphertext> distances,
                                        std::size_t k) override;

    std::uint64_t decrypt_calls() const;
    std::size_t oracle_calls() const;
    std::vector<OracleLogEntry> oracle_log() const;
    const ckks::SchemeParams& params() const { return params_; }

private:
    ckks::SchemeParams params_;
    ckks::SecretKey sk_;
    ckks::EncodingMap map_;
    std::mt19937_64 noise_rng_;
    mutable std::mutex mu_;
    std::uint64_t decrypt_calls_ = 0;
    std::vector<OracleLogEntry> oracle_log_;
};

/// The untrusted role: owns an encrypted dataset and runs training through
/// the homomorphic ops. Decryption and ordering go through the injected
/// interfaces; no key-typed field exists here.
class TrainingServer {
public:
    explicit TrainingServer(data::EncryptedDataset dataset);

    const data::EncryptedDataset& dataset() const { return data_; }

    regression::RegressionModel fit_regression(const regression::FeatureMapSpec& spec,
                                               const data::ScalerParams& scaler,
                                               const ckks::Ciphertext& encrypted_one,
                                               regression::AggregateDecryptor& aggregates);
    knn::KnnModel fit_knn(std::size_t k) const;

private:
    data::EncryptedDataset data_;
};

enum class Model { linreg, knn, mlp };
enum class Setting { enc_enc, plain_plain, plain_enc, enc_plain };

std::string to_string(Model m);
std::string to_string(Setting s);
Model parse_model(const std::string& s);
Setting parse_setting(const std::string& s);

struct BenchConfig {
    Model model = Model::linreg;
    Setting setting = Setting::plain_plain;
    std::string dataset_csv;  // empty selects the synthetic generator
    std::string target_column = "MEDV";
    std::size_t repeats = 10;
    double test_fraction = 0.2;
    std::uint64_t base_seed = 7;

    std::size_t knn_k = 3;
    std::size_t degree = 1;
    std::size_t hidden_units = 16;
    double learning_rate = 0.02;
    std::size_t epochs = 500;

    data::SyntheticKind synth_kind = data::SyntheticKind::linear;
    std::size_t synth_n = 500;
    double synth_noise_sd = 0.01;

    ckks::SchemeParams scheme;
    std::uint64_t key_seed = 42;
    std::string key_file;  // optional; overrides scheme and key_seed

    /// Rejects invalid model/setting pairs (knn needs one representation on
    /// both sides; the mlp cannot be trained under encryption) and bad
    /// numeric ranges, before any work happens.
    void validate() const;
};

struct BenchReport {
    BenchConfig config;
    std::string dataset_label;
    std::vector<data::MetricsReport> per_repeat;
    double mae_mean = 0, mae_std = 0;
    double rmse_mean = 0, rmse_std = 0;
    double r2_mean = 0, r2_std = 0;
    double fit_seconds = 0;      // mean per repeat
    double predict_seconds = 0;  // mean per repeat
    std::uint64_t decrypt_calls = 0;  // total across repeats
    std::size_t oracle_calls = 0;     // total across repeats
};

/// Runs the configured experiment: per repeat, split (seed = base + r),
/// fit the scaler on the train split, run the model in the configured
/// setting, inverse-transform predictions, and score in original units.
/// Fit and predict are timed separately; encryption of the respective
/// split is inside the timed window.
BenchReport run_experiment(const BenchConfig& cfg);

std::string format_table(const BenchReport& report);
extern const char* const kCsvHeader;
std::string format_csv_row(const BenchReport& report);

}  // namespace hepoly::protocol

#endif  // HEPOLY_PROTOCOL_HPP
