var a = 1, b = 2, c = 3, x = 1, img = ee.Image(0), s = 'z';
var s3 = 'it\'s // fine'; // escaped quote
var q = a / b / c; // divisions, not regexes

var d = x++ / 2; /* after postfix */
// standalone comment 74
if (x) { /* empty */ } else { print('a/*b*/c'); }
// standalone comment 36
var m = s.replace(/\/\//g, '/'); // escaped slashes
// standalone comment 7
var m = s.replace(/\/\//g, '/'); // escaped slashes
var s3 = 'it\'s // fine'; // escaped quote
// standalone comment 9
var r2 = /[/]+/.test('a//b');

var o = {a: 1, /* key */ b: 'x//y'}; // object
// standalone comment 40
if (x) { /* empty */ } else { print('a/*b*/c'); }
