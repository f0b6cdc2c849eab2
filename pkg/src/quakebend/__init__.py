# SPDX-FileCopyrightText: 2024-present lachiewalker <lachiewalker1@hotmail.com>
#
# SPDX-License-Identifier: MIT
__version__ = "0.1.0"
