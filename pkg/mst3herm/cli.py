"""
コマンドラインインターフェース

主な機能:
- params: 体と型を検証して要約を表示
- keygen / encrypt / decrypt: 鍵ファイル・暗号文ファイルの生成と復号
- selftest: 同梱の計算例を照合してレポートを表示
- attack: 全探索攻撃ベンチの実行

終了コード: 0 成功、1 使い方の誤り、2 データ不正、3 復号失敗、4 フィクスチャ照合の失敗
"""

import argparse
import logging
import random
import sys
import uuid
from pathlib import Path
from typing import List, Optional, Sequence

from pydantic import ValidationError

from .algebra.field import FieldParams, make_field, qtrace_kernel
from .config import Settings, get_settings
from .errors import FieldTooLargeForScan, Mst3HermError
from .monitoring.logging_config import LogContext, setup_logging
from .monitoring.metrics import metrics_manager
from .scheme.mst3 import SchemeParams, decrypt, encrypt, keygen, make_scheme_params
from .tools.attacks import ATTACK_IDS, render_reports, run_bench
from .tools.codec import (
    dump_ciphertext,
    dump_message,
    dump_public_key,
    dump_secret_key,
    load_ciphertext,
    load_public_key,
    load_secret_key,
    parse_message,
)
from .tools.fixtures import load_fixtures, run_fixture_checks

logger = logging.getLogger("mst3herm.cli")

# 名前付きのパラメータ組: (p, n, 法の係数, type1, type2)
PRESETS = {
    "paper-3-6": (3, 3, (2, 2, 0, 0, 0, 0, 1), (27, 9, 3), (9, 3)),
    "toy-3": (3, 1, (2, 2, 1), (3, 3), (3,)),
    "toy-5": (5, 1, (2, 4, 1), (5, 5), (5,)),
}

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_FIXTURE_FAILED = 4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _int_list(value: str) -> List[int]:
    try:
        return [int(v) for v in value.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"カンマ区切りの整数ではありません: {value!r}")


def _add_field_arguments(parser: argparse.ArgumentParser, default_preset: Optional[str] = None):
    group = parser.add_argument_group("体と型")
    group.add_argument("--preset", choices=sorted(PRESETS), default=default_preset,
                       help="名前付きのパラメータ組")
    group.add_argument("--p", type=int, help="標数（奇素数）")
    group.add_argument("--n", type=int, help="q = p^n の n")
    group.add_argument("--modulus", type=_int_list, help="g(z) の係数 c0..c2n（カンマ区切り）")
    group.add_argument("--generator", type=str, default=None, help="生成元の桁文字列")
    group.add_argument("--type1", type=_int_list, help="beta 段の型（例: 27,9,3）")
    group.add_argument("--type2", type=_int_list, help="gamma 段の型（例: 9,3）")


def build_parser() -> argparse.ArgumentParser:
    """
    引数パーサーを構築

    Returns:
        argparse.ArgumentParser: サブコマンド付きのパーサー
    """
    parser = _Parser(prog="mst3herm", description="三パラメータ群上の MST3 型暗号")
    parser.add_argument("--log-level", type=str, default=None, help="ログレベル（既定は設定値）")
    parser.add_argument("--metrics", action="store_true", help="終了時にメトリクスを標準エラーへ出力")
    subparsers = parser.add_subparsers(dest="command", required=True, help="サブコマンド")

    params_parser = subparsers.add_parser("params", help="体と型を検証して表示")
    _add_field_arguments(params_parser)

    keygen_parser = subparsers.add_parser("keygen", help="鍵の組を生成")
    _add_field_arguments(keygen_parser)
    keygen_parser.add_argument("--seed", type=int, default=None, help="乱数シード")
    keygen_parser.add_argument("--out-pk", type=Path, required=True, help="公開鍵の出力先")
    keygen_parser.add_argument("--out-sk", type=Path, required=True, help="秘密鍵の出力先")

    encrypt_parser = subparsers.add_parser("encrypt", help="メッセージを暗号化")
    encrypt_parser.add_argument("--pk", type=Path, required=True, help="公開鍵ファイル")
    encrypt_parser.add_argument("--in", dest="input", type=Path, required=True, help="メッセージファイル")
    encrypt_parser.add_argument("--out", type=Path, required=True, help="暗号文の出力先")
    encrypt_parser.add_argument("--q1", type=int, default=None, help="Q₁ を固定")
    encrypt_parser.add_argument("--q2", type=int, default=None, help="Q₂ を固定")
    encrypt_parser.add_argument("--seed", type=int, default=None, help="Q を選ぶ乱数シード")

    decrypt_parser = subparsers.add_parser("decrypt", help="暗号文を復号")
    decrypt_parser.add_argument("--sk", type=Path, required=True, help="秘密鍵ファイル")
    decrypt_parser.add_argument("--pk", type=Path, required=True, help="公開鍵ファイル")
    decrypt_parser.add_argument("--in", dest="input", type=Path, required=True, help="暗号文ファイル")
    decrypt_parser.add_argument("--out", type=Path, required=True, help="復号結果の出力先")

    selftest_parser = subparsers.add_parser("selftest", help="計算例の照合")
    selftest_parser.add_argument("--fixtures", type=Path, default=None, help="フィクスチャのディレクトリ")
    selftest_parser.add_argument("--format", choices=("text", "records"), default="text")

    attack_parser = subparsers.add_parser("attack", help="全探索攻撃ベンチ")
    _add_field_arguments(attack_parser, default_preset="toy-3")
    attack_parser.add_argument("--id", dest="attack_id", choices=ATTACK_IDS + ("all",), default="all")
    attack_parser.add_argument("--count", type=int, default=1, help="ランダムな鍵の試行回数")
    attack_parser.add_argument("--seed", type=int, default=None, help="乱数シード")
    attack_parser.add_argument("--workers", type=int, default=None, help="プロセス数")
    attack_parser.add_argument("--bound", type=int, default=None, help="探索空間の上限")
    attack_parser.add_argument("--format", choices=("text", "records"), default="text")

    return parser


def _scheme_from_args(args: argparse.Namespace) -> SchemeParams:
    if args.preset is not None:
        p, n, modulus, type1, type2 = PRESETS[args.preset]
        if args.p is not None or args.n is not None or args.modulus is not None:
            raise UsageError("--preset と --p/--n/--modulus は同時に指定できません")
    else:
        if args.p is None or args.n is None or args.modulus is None:
            raise UsageError("--preset か、--p --n --modulus のすべてが必要です")
        if args.type1 is None or args.type2 is None:
            raise UsageError("--preset を使わない場合は --type1 と --type2 が必要です")
        p, n, modulus, type1, type2 = args.p, args.n, args.modulus, None, None
    ctx = make_field(p, n, modulus, generator=args.generator)
    return make_scheme_params(ctx, args.type1 or type1, args.type2 or type2)


def _rng(seed: Optional[int]) -> random.Random:
    return random.Random(seed) if seed is not None else random.SystemRandom()


def _distinct(*paths: Path):
    resolved = [p.resolve() for p in paths]
    if len(set(resolved)) != len(resolved):
        raise UsageError("入力と出力に同じパスは指定できません")


def _write(path: Path, text: str):
    path.write_text(text, encoding="utf-8")
    logger.info(f"書き出しました: {path}")


def _field_summary(sp: SchemeParams) -> str:
    ctx: FieldParams = sp.field
    try:
        kernel = str(len(qtrace_kernel(ctx)))
    except FieldTooLargeForScan:
        kernel = "skipped"
    lines = [
        f"p={ctx.p}",
        f"n={ctx.n}",
        f"q={ctx.q}",
        f"q2={ctx.order}",
        f"modulus={','.join(str(c) for c in ctx.modulus)}",
        f"generator={ctx.digits(ctx.generator)}",
        f"dlog_table={'yes' if ctx.has_table else 'no'}",
        f"kernel_size={kernel}",
        f"type1={sp.type1.text()}",
        f"type2={sp.type2.text()}",
    ]
    return "\n".join(lines)


def _cmd_params(args) -> int:
    print(_field_summary(_scheme_from_args(args)))
    return EXIT_OK


def _cmd_keygen(args) -> int:
    _distinct(args.out_pk, args.out_sk)
    sp = _scheme_from_args(args)
    pk, sk = keygen(sp, _rng(args.seed))
    _write(args.out_pk, dump_public_key(pk))
    _write(args.out_sk, dump_secret_key(sk))
    return EXIT_OK


def _cmd_encrypt(args) -> int:
    _distinct(args.input, args.out)
    if (args.q1 is None) != (args.q2 is None):
        raise UsageError("--q1 と --q2 は両方指定するか、両方省略してください")
    pk = load_public_key(args.pk.read_text(encoding="utf-8"))
    x = parse_message(args.input.read_text(encoding="utf-8"), pk.params.field)
    Q = None if args.q1 is None else (args.q1, args.q2)
    ct = encrypt(pk, x, Q, rng=_rng(args.seed))
    _write(args.out, dump_ciphertext(ct))
    return EXIT_OK


def _cmd_decrypt(args) -> int:
    _distinct(args.input, args.out)
    sk = load_secret_key(args.sk.read_text(encoding="utf-8"))
    pk = load_public_key(args.pk.read_text(encoding="utf-8"))
    ct = load_ciphertext(args.input.read_text(encoding="utf-8"))
    _write(args.out, dump_message(decrypt(sk, pk, ct)))
    return EXIT_OK


def _cmd_selftest(args) -> int:
    report = run_fixture_checks(load_fixtures(args.fixtures))
    print(report.render_text() if args.format == "text" else report.render_records())
    return EXIT_OK if report.ok else EXIT_FIXTURE_FAILED


def _cmd_attack(args) -> int:
    if args.count < 1:
        raise UsageError("--count は 1 以上にしてください")
    sp = _scheme_from_args(args)
    attack_ids = None if args.attack_id == "all" else [args.attack_id]
    reports = run_bench(sp, args.count, _rng(args.seed), attack_ids,
                        bound=args.bound, workers=args.workers)
    if args.format == "text":
        print(render_reports(reports))
    else:
        print("\n\n".join("\n".join(r.as_records()) for r in reports))
    return EXIT_OK


_COMMANDS = {
    "params": _cmd_params,
    "keygen": _cmd_keygen,
    "encrypt": _cmd_encrypt,
    "decrypt": _cmd_decrypt,
    "selftest": _cmd_selftest,
    "attack": _cmd_attack,
}


def _report_error(exc: BaseException):
    print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    CLI のエントリポイント

    Args:
        argv (Optional[Sequence[str]]): 引数（省略時は sys.argv[1:]）

    Returns:
        int: 終了コード
    """
    try:
        args = build_parser().parse_args(argv)
        settings = get_settings()
        if args.log_level is not None:
            settings = Settings(**{**settings.model_dump(), "log_level": args.log_level})
    except UsageError as e:
        _report_error(e)
        return EXIT_USAGE
    except ValidationError as e:
        _report_error(e)
        return EXIT_USAGE
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_OK

    app_logger = setup_logging(log_level=settings.log_level, log_dir=settings.log_dir)
    try:
        with LogContext(app_logger, run_id=uuid.uuid4().hex[:12], command=args.command):
            return _COMMANDS[args.command](args)
    except UsageError as e:
        _report_error(e)
        return EXIT_USAGE
    except ValidationError as e:
        _report_error(e)
        return EXIT_USAGE
    except Mst3HermError as e:
        _report_error(e)
        return e.exit_code
    except OSError as e:
        _report_error(e)
        return EXIT_DATA
    finally:
        if args.metrics:
            print(metrics_manager.render(), file=sys.stderr)


if __name__ == "__main__":
    sys.exit(main())
